//! The function-spec wire format.

use super::FunctionSpec;
use crate::error::Result;

/// Parses and validates a function spec document.
pub fn parse_spec(document: &str) -> Result<FunctionSpec> {
    let spec: FunctionSpec = serde_json::from_str(document)?;
    spec.validate()?;
    Ok(spec)
}

/// Parses a spec meant as a symbol `φ` and applies the self-map gate.
pub fn parse_symbol(document: &str) -> Result<FunctionSpec> {
    let spec = parse_spec(document)?;
    spec.self_map_gate()?;
    Ok(spec)
}

pub fn emit_spec(spec: &FunctionSpec) -> String {
    serde_json::to_string(spec).expect("function specs always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::functions::{Atom, InnerFunctionData};
    use crate::series::{PowerSeries, C64};

    #[test]
    fn documented_examples_parse() {
        let h = parse_spec(r#"{"type":"frac_power","beta":0.375}"#).unwrap();
        assert_eq!(h, FunctionSpec::frac_power(0.375));
        let phi = parse_symbol(r#"{"type":"exp_of_moebius"}"#).unwrap();
        assert_eq!(phi, FunctionSpec::ExpOfMoebius);
        let b = parse_symbol(
            r#"{"type":"blaschke","rotation":0,"vanishing_order":1,"zeros":[{"re":0.5,"im":0}],"atoms":[]}"#,
        )
        .unwrap();
        let z = C64::new(0.2, 0.1);
        let want = z * (0.5 - z) / (1.0 - 0.5 * z);
        assert!((b.eval(z).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn nested_specs_parse() {
        let doc = r#"{"type":"composition","parts":[
            {"type":"frac_power","beta":0.25},
            {"type":"affine","add":0.25,"scale":[0.5,0],"inner":{"type":"icecream"}},
            {"type":"series","coeffs":[[0,0],[0.5,0]]}]}"#;
        let f = parse_spec(doc).unwrap();
        assert!(f.eval(C64::new(0.1, 0.0)).is_ok());
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse_spec(r#"{"type":"nope"}"#), Err(Error::Spec(_))));
        assert!(parse_spec(r#"{"type":"blaschke","zeros":[{"re":1.0,"im":0}]}"#).is_err());
        assert!(parse_spec(r#"{"type":"blaschke","atoms":[{"angle":0,"mass":-1}]}"#).is_err());
        assert!(parse_spec(r#"{"type":"automorphism","a":{"re":0,"im":1}}"#).is_err());
        let e = parse_symbol(r#"{"type":"affine","add":0.5,"scale":0.6,"inner":{"type":"monomial_power","n":1}}"#);
        assert!(matches!(e, Err(Error::SelfMapGate { .. })));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let specs = vec![
            FunctionSpec::series(PowerSeries::new(vec![C64::new(0.1, 1.0 / 3.0), C64::new(-1e-300, 2.5)]).unwrap()),
            FunctionSpec::Blaschke(InnerFunctionData {
                rotation: std::f64::consts::PI / 7.0,
                vanishing_order: 2,
                zeros: vec![C64::new(0.123456789012345, -0.3).into()],
                atoms: vec![Atom { angle: 1.1, mass: 0.7 }],
                generator: Some(crate::functions::ZeroGenerator { angle: 0.0, c: 1.0, q: 0.5, count: 30 }),
            }),
            FunctionSpec::product(vec![
                FunctionSpec::frac_power(0.1 + 0.2),
                FunctionSpec::composition(vec![FunctionSpec::Icecream, FunctionSpec::automorphism(C64::new(0.1, 0.7))]),
            ]),
            FunctionSpec::SingularInner { atoms: vec![Atom { angle: 0.3, mass: 2.0 }] },
            FunctionSpec::ExpOfMoebius,
            FunctionSpec::constant(C64::new(1.0, 0.0)),
        ];
        for s in specs {
            let back = parse_spec(&emit_spec(&s)).unwrap();
            assert_eq!(back, s);
        }
    }
}
