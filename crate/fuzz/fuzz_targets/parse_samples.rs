#![no_main]

use gapcount::field::{Interpolation, SampleTable};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&mode, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let interpolation = if mode & 1 == 0 { Interpolation::Linear } else { Interpolation::Step };
    let _ = SampleTable::parse(text, interpolation);
});
