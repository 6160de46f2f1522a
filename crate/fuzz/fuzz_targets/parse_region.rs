#![no_main]

use gapcount::region::RegionSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(region) = text.parse::<RegionSpec>() {
        let shown = region.to_string();
        let back: RegionSpec = shown.parse().expect("displayed region must parse");
        assert_eq!(back.to_string(), shown);
    }
});
