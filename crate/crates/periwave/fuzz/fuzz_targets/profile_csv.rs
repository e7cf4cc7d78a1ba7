#![no_main]

use libfuzzer_sys::fuzz_target;

// Profile CSVs are re-read by the dynamics command; the reader validates the
// header, field counts, finiteness and grid uniformity without panicking.
fuzz_target!(|data: &[u8]| {
    if let Ok(profile) = periwave::Profile::from_csv_bytes(data) {
        // anything that parses must be internally consistent
        assert!(profile.grid.h > 0.0);
        assert!(profile.values.len() == profile.grid.n);
        let _ = profile.eval_at(0.0);
    }
});
