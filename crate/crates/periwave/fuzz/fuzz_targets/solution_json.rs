#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(record) = periwave::io::SolutionRecord::from_json_slice(data) {
        // accepted records carry usable scalars and a sibling-only CSV name
        assert!(record.k.is_finite());
        assert!(!record.profile_csv.contains('/'));
    }
});
