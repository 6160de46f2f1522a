#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // samples_file paths resolve against a directory that does not exist
    if let Ok(cfg) = gapcount::config::parse_config(text, Path::new("/nonexistent")) {
        let again = gapcount::config::parse_config(&cfg.echo(), Path::new("/nonexistent"))
            .expect("echoed configuration must parse");
        assert_eq!(again.echo(), cfg.echo());
    }
});
