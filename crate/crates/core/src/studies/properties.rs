//! Sampled operator properties: Lipschitz, growth, `X₁`-regularity and the
//! cut-off commutation inequality.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Check;
use crate::grid::TensorGrid;
use crate::nonlinear_ops::{
    sample_commutation, sample_growth, sample_lipschitz, sample_x1_regularity, OperatorSpec, OperatorVariant,
    SampledCheck,
};
use crate::Result;

fn to_check(name: &str, s: &SampledCheck, gated: bool) -> Check {
    let c = Check::gated(name, s.pass(), s.worst_ratio, 1.0).with_note(format!(
        "{} violations in {} samples; measured is the worst lhs/rhs",
        s.violations, s.samples
    ));
    Check { gated, ..c }
}

/// Whether the commutation inequality is posed for this operator: kernel
/// operators whose kernel does not depend on `X₁`.
pub fn commutation_applies(spec: &OperatorSpec) -> bool {
    matches!(
        spec.variant,
        OperatorVariant::KernelInner { kernel, .. } | OperatorVariant::KernelOuter { kernel, .. }
            if kernel.is_x1_independent()
    )
}

/// Sample every property with `samples` draws. Each property uses its own
/// generator derived from `seed`, so adding a check never shifts the others.
pub fn operator_checks(spec: &OperatorSpec, grid: &TensorGrid, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k));
    let mut out = vec![
        to_check("lipschitz", &sample_lipschitz(spec, grid, samples, &mut rng(1))?, true),
        to_check("growth", &sample_growth(spec, grid, samples, &mut rng(2))?, true),
        to_check("x1_regularity", &sample_x1_regularity(spec, grid, samples, &mut rng(3))?, true),
    ];
    if commutation_applies(spec) {
        out.push(to_check(
            "commutation",
            &sample_commutation(spec, grid, samples, &mut rng(4))?,
            true,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear_ops::{Kernel, Nonlinearity};

    #[test]
    fn checks_are_reproducible_and_named() {
        let g = TensorGrid::unit_square(10).unwrap();
        let spec = OperatorSpec::kernel_inner(
            Kernel::Separable,
            Nonlinearity::Tanh {
                scale: 1.0,
                shift: 1.0,
            },
        );
        let a = operator_checks(&spec, &g, 10, 7).unwrap();
        let b = operator_checks(&spec, &g, 10, 7).unwrap();
        assert_eq!(a, b);
        let names: Vec<&str> = a.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["lipschitz", "growth", "x1_regularity"]);
        assert!(a.iter().all(|c| c.pass));
    }

    #[test]
    fn commutation_is_posed_only_for_x1_independent_kernels() {
        let a = Nonlinearity::Tanh {
            scale: 1.0,
            shift: 0.0,
        };
        assert!(commutation_applies(&OperatorSpec::kernel_inner(Kernel::One, a)));
        assert!(commutation_applies(&OperatorSpec::kernel_outer(Kernel::Cosine, a)));
        assert!(!commutation_applies(&OperatorSpec::kernel_inner(Kernel::Separable, a)));
        assert!(!commutation_applies(&OperatorSpec::projector(a)));
    }
}
