//! Random instances for audits and property checks: Haar-like states and
//! unitaries, observables, and CPTP channels.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::linalg::{c, Ket, LinearOp, C64};
use crate::measure::Observable;
use crate::states::{BackwardState, ForwardState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal divided out).
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> LinearOp {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            c(1.0, 0.0)
        };
        q.column_mut(j).scale_mut_complex(phase);
    }
    LinearOp::new(q, vec![d]).expect("square")
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, factor: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, factor: C64) {
        for x in self.iter_mut() {
            *x *= factor;
        }
    }
}

pub fn ket<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Ket {
    let n: usize = dims.iter().product();
    let amps = (0..n).map(|_| gaussian(rng)).collect();
    Ket::new(amps, dims)
        .and_then(|k| k.normalized())
        .expect("nonzero Gaussian vector")
}

pub fn forward<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> ForwardState {
    ForwardState::new(ket(dims, rng)).expect("normalized")
}

pub fn backward<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> BackwardState {
    BackwardState::from_coefficients(ket(dims, rng)).expect("normalized")
}

/// Nondegenerate observable `U diag(λ) U†` with well-separated eigenvalues.
pub fn observable<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Observable {
    let levels: Vec<usize> = (0..d).collect();
    observable_with_levels(&levels, rng)
}

/// Observable whose `k`-th eigenvector (in a random basis) carries eigenvalue
/// level `levels[k]`; repeated levels give degenerate eigenspaces.
pub fn observable_with_levels<R: Rng + ?Sized>(levels: &[usize], rng: &mut R) -> Observable {
    let d = levels.len();
    let u = unitary(d, rng);
    let offset: f64 = rng.random_range(-1.0..1.0);
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c(levels[i] as f64 + offset, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let m = u.matrix() * diag * u.matrix().adjoint();
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    Observable::new(LinearOp::new(m, vec![d]).expect("square")).expect("Hermitian")
}

/// Random CPTP channel with `kraus_count` operators, cut from the columns of
/// a Haar unitary (a random Stinespring isometry).
pub fn channel<R: Rng + ?Sized>(dims: Vec<usize>, kraus_count: usize, rng: &mut R) -> Channel {
    let d: usize = dims.iter().product();
    let u = unitary(d * kraus_count, rng);
    let kraus = (0..kraus_count)
        .map(|k| {
            let block = u.matrix().view((k * d, 0), (d, d)).clone_owned();
            LinearOp::new(block, dims.clone()).expect("square block")
        })
        .collect();
    Channel::physical(kraus).expect("isometry blocks are complete")
}
