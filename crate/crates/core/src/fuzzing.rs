//! Properties exercised by the fuzz targets; the corpus replay test calls
//! the same functions on stable.

use crate::experiment::{report_from_json, report_json, ExperimentConfig};
use crate::field::{parse_int_poly, parse_map_spec, PrimeField};

/// A parsed map prints to text that parses back to the same map, and
/// evaluates without panicking.
pub fn map_spec(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_map_spec(text, None) else {
        return;
    };
    let again = parse_map_spec(&spec.to_string(), Some(spec.arity()))
        .unwrap_or_else(|e| panic!("{spec} does not re-parse: {e}"));
    assert_eq!(again, spec);
    let field = PrimeField::new(101).expect("prime");
    let point = [0, 1, 57];
    let _ = spec.eval(&field, &point[..spec.arity()]);
}

/// A parsed polynomial prints to text that parses back to it.
pub fn int_poly(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(poly) = parse_int_poly(text, None) else {
        return;
    };
    let again = parse_int_poly(&poly.display_in('x'), Some('x'))
        .unwrap_or_else(|e| panic!("{} does not re-parse: {e}", poly.display_in('x')));
    assert_eq!(again, poly);
}

/// An accepted configuration survives serialization.
pub fn config(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ExperimentConfig::from_json(text) else {
        return;
    };
    let again = ExperimentConfig::from_json(&cfg.to_json()).expect("serialized config is valid");
    assert_eq!(again, cfg);
}

/// A decoded report survives re-encoding.
pub fn report(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rep) = report_from_json(text) else {
        return;
    };
    let again = report_from_json(&report_json(&rep)).expect("encoded report decodes");
    assert_eq!(again, rep);
}
