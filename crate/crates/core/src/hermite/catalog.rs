use std::f64::consts::PI;

use super::activation::{ActivationKind, ActivationSpec};

/// Closed-form non-linearity strength, where one is known.
///
/// | activation | β₀(α) |
/// |---|---|
/// | identity, any α | 1 |
/// | `He_k`, k ≥ 2, α = 1 | 2 |
/// | `sin(αx)` | `2 - α²/sinh(α²)` |
/// | `exp(αx)` | `2 - α²/(e^{α²} - 1)` |
/// | `max(αx, 0)` | `(3π - 4)/(2π - 2)` |
/// | `1[αx > 0]` | `2 - 2/π` |
///
/// The sine and exponential forms are algebraically equal to
/// `2(-1 + e^{2α²} - e^{α²}α²)/(-1 + e^{2α²})` and
/// `(2 - 2e^{α²} + α²)/(1 - e^{α²})`, rewritten to stay accurate as `α → 0`.
/// ReLU and step are positively homogeneous of degree 1 and 0, so gain does
/// not change their β₀.
pub fn beta0_closed_form(act: &ActivationSpec) -> Option<f64> {
    let a2 = act.gain() * act.gain();
    match act.kind {
        ActivationKind::Identity => Some(1.0),
        ActivationKind::HermiteBasis(1) => Some(1.0),
        ActivationKind::HermiteBasis(k) if k >= 2 && act.gain() == 1.0 => Some(2.0),
        ActivationKind::Sin => Some(2.0 - a2 / a2.sinh()),
        ActivationKind::Exp => Some(2.0 - a2 / a2.exp_m1()),
        ActivationKind::Relu => Some((3.0 * PI - 4.0) / (2.0 * PI - 2.0)),
        ActivationKind::Step => Some(2.0 - 2.0 / PI),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn unit(kind: ActivationKind) -> ActivationSpec {
        ActivationSpec::unit(kind)
    }

    #[test]
    fn unit_gain_values() {
        let b = |k| beta0_closed_form(&unit(k)).unwrap();
        assert!((b(ActivationKind::Step) - 1.36338).abs() < 1e-5);
        assert!((b(ActivationKind::Sin) - (2.0 - 2.0 * E / (E * E - 1.0))).abs() < 1e-15);
        assert!((b(ActivationKind::Sin) - 1.149082).abs() < 1e-6);
        assert!((b(ActivationKind::Exp) - (2.0 - 1.0 / (E - 1.0))).abs() < 1e-15);
        assert!((b(ActivationKind::Exp) - 1.41802).abs() < 1e-5);
        assert!((b(ActivationKind::Relu) - 1.266529).abs() < 1e-6);
        assert_eq!(b(ActivationKind::Identity), 1.0);
        assert_eq!(b(ActivationKind::HermiteBasis(2)), 2.0);
        assert!(beta0_closed_form(&unit(ActivationKind::Tanh)).is_none());
    }

    #[test]
    fn stable_forms_match_table_expressions() {
        for alpha in [0.25f64, 0.5, 1.0, 2.0] {
            let a2 = alpha * alpha;
            let e1 = a2.exp();
            let e2 = (2.0 * a2).exp();
            let sin_table = 2.0 * (-1.0 + e2 - e1 * a2) / (-1.0 + e2);
            let exp_table = (2.0 - 2.0 * e1 + a2) / (1.0 - e1);
            let s =
                beta0_closed_form(&unit(ActivationKind::Sin).with_gain(alpha).unwrap()).unwrap();
            let x =
                beta0_closed_form(&unit(ActivationKind::Exp).with_gain(alpha).unwrap()).unwrap();
            assert!((s - sin_table).abs() < 1e-12, "sin α={alpha}");
            assert!((x - exp_table).abs() < 1e-12, "exp α={alpha}");
        }
    }

    #[test]
    fn sine_tends_to_linear() {
        let s = beta0_closed_form(&unit(ActivationKind::Sin).with_gain(1e-4).unwrap()).unwrap();
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hermite_with_gain_has_no_closed_form() {
        let a = ActivationSpec::hermite(2).with_gain(2.0).unwrap();
        assert!(beta0_closed_form(&a).is_none());
    }
}
