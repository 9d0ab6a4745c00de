//! Built-in closed-form field library used by the verification suite and the
//! CLI presets.  Every entry pairs a field with its associated domain and the
//! exact homogeneity degree about the distinguished boundary point 0.

use crate::fields::{wedge_domain_2d, AnalyticField, Field, PolyTerm};
use crate::geometry::ConvexDomain;

const PI: f64 = std::f64::consts::PI;

pub fn upper_half_plane() -> ConvexDomain {
    AnalyticField::one_sided_linear([0.0, 1.0, 0.0], 2).domain
}

pub fn wedge_domain(alpha: f64) -> ConvexDomain {
    wedge_domain_2d(alpha)
}

/// A named oracle: analytic field, domain, and the frequency at the origin.
pub struct Oracle {
    pub name: &'static str,
    pub field: Field,
    pub domain: ConvexDomain,
    /// Exact homogeneity degree about 0 (equals N(0, r) for every r).
    pub degree: f64,
}

pub fn preset(name: &str) -> Option<Oracle> {
    let mk = |name: &'static str, f: AnalyticField, degree: f64| {
        let domain = f.domain.clone();
        Some(Oracle { name, field: Field::Analytic(f), domain, degree })
    };
    match name {
        "half_plane_linear" => mk(
            "half_plane_linear",
            AnalyticField::one_sided_linear([0.0, 1.0, 0.0], 2),
            1.0,
        ),
        "wedge_pi" => mk("wedge_pi", AnalyticField::wedge_eigenfunction(PI, 1), 1.0),
        "wedge_3pi_4" => {
            mk("wedge_3pi_4", AnalyticField::wedge_eigenfunction(0.75 * PI, 1), 4.0 / 3.0)
        }
        "wedge_2pi_3" => {
            mk("wedge_2pi_3", AnalyticField::wedge_eigenfunction(2.0 * PI / 3.0, 1), 1.5)
        }
        "wedge_pi_2" => mk("wedge_pi_2", AnalyticField::wedge_eigenfunction(0.5 * PI, 1), 2.0),
        "poly_Re_z2" => mk(
            "poly_Re_z2",
            AnalyticField::harmonic_polynomial(2, 2, vec![1.0, 0.0]).unwrap(),
            2.0,
        ),
        "poly_Im_z2" => mk(
            "poly_Im_z2",
            AnalyticField::harmonic_polynomial(2, 2, vec![0.0, 1.0])
                .unwrap()
                .restricted(upper_half_plane()),
            2.0,
        ),
        "poly_Im_z3" => mk(
            "poly_Im_z3",
            AnalyticField::harmonic_polynomial(2, 3, vec![0.0, 1.0])
                .unwrap()
                .restricted(upper_half_plane()),
            3.0,
        ),
        // Im(z^3 - 0.6 z^2) on the half-plane: two boundary critical points
        // (0 and 0.4), so the frequency genuinely drops across scales.
        "twin_critical" => {
            let f = AnalyticField::polynomial_sum(
                2,
                vec![
                    PolyTerm { degree: 3, coeffs: vec![0.0, 1.0] },
                    PolyTerm { degree: 2, coeffs: vec![0.0, -0.6] },
                ],
            )
            .unwrap()
            .restricted(upper_half_plane());
            let domain = f.domain.clone();
            Some(Oracle { name: "twin_critical", field: Field::Analytic(f), domain, degree: 2.0 })
        }
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "half_plane_linear",
        "wedge_pi",
        "wedge_3pi_4",
        "wedge_2pi_3",
        "wedge_pi_2",
        "poly_Re_z2",
        "poly_Im_z2",
        "poly_Im_z3",
        "twin_critical",
    ]
}

/// The oracles whose frequency at 0 is exactly their homogeneity degree;
/// this is the suite most invariant checks sweep over.
pub fn homogeneous_suite() -> Vec<Oracle> {
    ["half_plane_linear", "wedge_pi", "wedge_3pi_4", "wedge_2pi_3", "wedge_pi_2", "poly_Im_z2", "poly_Im_z3"]
        .iter()
        .map(|n| preset(n).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use crate::linalg::pt2;

    #[test]
    fn presets_resolve() {
        for name in preset_names() {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn im_z2_is_2xy_on_half_plane() {
        let o = preset("poly_Im_z2").unwrap();
        assert!((o.field.value(pt2(0.3, 0.5)) - 2.0 * 0.3 * 0.5).abs() < 1e-14);
        assert_eq!(o.field.value(pt2(0.3, -0.5)), 0.0);
    }
}
