//! Stable-toolchain companions to the fuzz targets: replay the checked-in
//! corpus seeds and check round trips on generated input.

use std::path::{Path, PathBuf};

use gapcount::config::parse_config;
use gapcount::field::{Interpolation, SampleTable};
use gapcount::region::RegionSpec;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut seeds: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty(), "no seeds in {}", dir.display());
    seeds
}

fn config_round_trip(text: &str) {
    if let Ok(cfg) = parse_config(text, Path::new("/nonexistent")) {
        let echoed = cfg.echo();
        let again = parse_config(&echoed, Path::new("/nonexistent")).expect("echo parses");
        assert_eq!(again.echo(), echoed);
    }
}

#[test]
fn config_seeds() {
    for (path, bytes) in corpus("parse_config") {
        let text = String::from_utf8(bytes).unwrap();
        assert!(parse_config(&text, Path::new("/nonexistent")).is_ok(), "{}", path.display());
        config_round_trip(&text);
    }
}

#[test]
fn region_seeds() {
    for (path, bytes) in corpus("parse_region") {
        let text = String::from_utf8(bytes).unwrap();
        match text.parse::<RegionSpec>() {
            Ok(r) => assert_eq!(r.to_string().parse::<RegionSpec>().unwrap(), r),
            // the degenerate seed exercises the rejection path
            Err(_) => assert!(path.ends_with("degenerate")),
        }
    }
}

#[test]
fn sample_seeds() {
    for (path, bytes) in corpus("parse_samples") {
        let interpolation = if bytes[0] & 1 == 0 { Interpolation::Linear } else { Interpolation::Step };
        let text = std::str::from_utf8(&bytes[1..]).unwrap();
        assert!(SampleTable::parse(text, interpolation).is_ok(), "{}", path.display());
    }
}

#[test]
fn malformed_samples_report_lines() {
    let err = SampleTable::parse("x,B\n0,1\n1,oops\n", Interpolation::Linear).unwrap_err();
    assert!(matches!(err, gapcount::Error::Parse { line: 3, .. }), "{err}");
    assert!(SampleTable::parse("0,1\n0,2\n", Interpolation::Linear).is_err());
    assert!(SampleTable::parse("0,1,2\n", Interpolation::Linear).is_err());
}

proptest! {
    #[test]
    fn rectangles_round_trip(x0 in -1e3..1e3f64, w in 1e-6..1e3f64, y0 in -1e3..1e3f64, h in 1e-6..1e3f64) {
        let r = RegionSpec::rectangle(x0, x0 + w, y0, y0 + h).unwrap();
        prop_assert_eq!(r.to_string().parse::<RegionSpec>().unwrap(), r);
    }

    #[test]
    fn discs_round_trip(cx in -1e3..1e3f64, cy in -1e3..1e3f64, r in 1e-6..1e3f64) {
        let d = RegionSpec::disc(cx, cy, r).unwrap();
        prop_assert_eq!(d.to_string().parse::<RegionSpec>().unwrap(), d);
    }

    #[test]
    fn region_parser_never_panics(s in "\\PC{0,60}") {
        let _ = s.parse::<RegionSpec>();
        let _ = format!("polygon {s}").parse::<RegionSpec>();
    }

    #[test]
    fn sample_tables_read_back(steps in prop::collection::vec((1e-3..10.0f64, 0.1..5.0f64), 2..20)) {
        let mut x = -5.0;
        let mut text = String::from("# generated\nx,B\n");
        let mut expect = Vec::new();
        for (dx, b) in steps {
            x += dx;
            text.push_str(&format!("{x:?}, {b:?}\n"));
            expect.push((x, b));
        }
        let t = SampleTable::parse(&text, Interpolation::Linear).unwrap();
        let (xs, bs): (Vec<f64>, Vec<f64>) = expect.into_iter().unzip();
        prop_assert_eq!(t.xs(), xs.as_slice());
        prop_assert_eq!(t.values(), bs.as_slice());
    }

    #[test]
    fn sample_parser_never_panics(s in "[0-9eE+\\-.,# \\nxB]{0,80}") {
        let _ = SampleTable::parse(&s, Interpolation::Step);
    }

    #[test]
    fn config_parser_never_panics(body in "[a-z_=0-9.\\- \\n]{0,120}") {
        config_round_trip(&format!("[field]\nkind = constant\nb_plus = 1\n[grid]\n{body}"));
        config_round_trip(&body);
    }
}
