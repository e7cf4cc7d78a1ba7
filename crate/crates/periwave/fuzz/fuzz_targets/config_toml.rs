#![no_main]

use libfuzzer_sys::fuzz_target;

// Run configurations come from user-edited TOML; parsing plus structural
// validation must never panic, whatever the document contains.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = periwave::config::RunConfig::from_toml_str(text);
    }
});
