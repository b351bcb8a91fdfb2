//! Kraus-operator maps: physical (CPTP) channels and post-selected,
//! trace-decreasing linear maps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{LinearOp, C64};
use crate::states::DensityOp;

/// Completeness tolerance for physical channels.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<LinearOp>,
    physical: bool,
}

fn check_shapes(kraus: &[LinearOp]) -> Result<()> {
    let first = kraus
        .first()
        .ok_or(Error::BadChannel("no Kraus operators"))?;
    if kraus.iter().any(|k| k.dims() != first.dims()) {
        return Err(Error::BadChannel("Kraus operators differ in shape"));
    }
    Ok(())
}

impl Channel {
    /// A completely positive trace-preserving map; `Σ K†K = I` must hold
    /// within [`COMPLETENESS_TOL`].
    pub fn physical(kraus: Vec<LinearOp>) -> Result<Self> {
        check_shapes(&kraus)?;
        let ch = Self {
            kraus,
            physical: true,
        };
        if ch.completeness_defect() > COMPLETENESS_TOL {
            return Err(Error::BadChannel("Kraus operators are not complete"));
        }
        Ok(ch)
    }

    /// A post-selected map with no completeness requirement. Probability
    /// missing from `Σ K†K` counts as rejected runs.
    pub fn post_selected(kraus: Vec<LinearOp>) -> Result<Self> {
        check_shapes(&kraus)?;
        if kraus
            .iter()
            .all(|k| k.matrix().iter().all(|x| x.norm() == 0.0))
        {
            return Err(Error::BadChannel("all Kraus operators vanish"));
        }
        Ok(Self {
            kraus,
            physical: false,
        })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        Self::physical(vec![LinearOp::identity(dims)?])
    }

    pub fn unitary(u: LinearOp) -> Result<Self> {
        Self::physical(vec![u])
    }

    pub fn kraus(&self) -> &[LinearOp] {
        &self.kraus
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn dims(&self) -> &[usize] {
        self.kraus[0].dims()
    }

    pub fn side(&self) -> usize {
        self.kraus[0].side()
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> LinearOp {
        let n = self.side();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for k in &self.kraus {
            sum += k.matrix().adjoint() * k.matrix();
        }
        LinearOp::new(sum, self.dims().to_vec()).expect("square")
    }

    /// Max element-wise deviation of `Σ K†K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let id = LinearOp::identity(self.dims().to_vec()).expect("valid dims");
        self.completeness().max_abs_diff(&id)
    }

    /// `Σ K ρ K†`, unnormalized.
    pub fn apply_op(&self, rho: &LinearOp) -> Result<LinearOp> {
        if rho.side() != self.side() {
            return Err(Error::DimMismatch {
                expected: self.side(),
                found: rho.side(),
            });
        }
        let n = self.side();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for k in &self.kraus {
            out += k.matrix() * rho.matrix() * k.matrix().adjoint();
        }
        LinearOp::new(out, rho.dims().to_vec())
    }

    /// Applies a physical channel to a density operator.
    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        if !self.physical {
            return Err(Error::BadChannel("post-selected map needs renormalization"));
        }
        DensityOp::new(self.apply_op(rho.op())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::measure::pauli;

    #[test]
    fn dephasing_is_physical() {
        let p: f64 = 0.3;
        let k0 = pauli::identity().scaled(c((1.0 - p).sqrt(), 0.0));
        let k1 = pauli::z().scaled(c(p.sqrt(), 0.0));
        let ch = Channel::physical(vec![k0, k1]).unwrap();
        assert!(ch.completeness_defect() < 1e-15);
        let plus = crate::states::named_qubit("plus").unwrap().density();
        let out = ch.apply(&plus).unwrap();
        assert!((out.op().entry(0, 1).re - 0.5 * (1.0 - 2.0 * p)).abs() < 1e-15);
    }

    #[test]
    fn incomplete_set_rejected_as_physical() {
        let k = pauli::z().scaled(c(0.5, 0.0));
        assert!(Channel::physical(vec![k.clone()]).is_err());
        let ps = Channel::post_selected(vec![k]).unwrap();
        assert!(!ps.is_physical());
        assert!(ps.completeness_defect() > 0.5);
    }

    #[test]
    fn empty_and_zero_sets_rejected() {
        assert!(Channel::physical(vec![]).is_err());
        let zero = LinearOp::zeros(vec![2]).unwrap();
        assert!(Channel::post_selected(vec![zero]).is_err());
    }
}
