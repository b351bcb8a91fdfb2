//! Oracles shared by the integration tests. They build observables from a
//! known eigenbasis so expected statistics never go through the library's
//! eigensolver.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use twostate::linalg::{Ket, LinearOp};
use twostate::measure::Observable;
use twostate::random;

/// An observable together with the eigenbasis it was built from.
pub struct KnownObservable {
    pub obs: Observable,
    /// Columns are eigenvectors.
    pub basis: DMatrix<C64>,
    /// `groups[n]` lists the columns spanning outcome `n`'s eigenspace.
    pub groups: Vec<Vec<usize>>,
}

/// Eigenvalue levels for a `d`-dimensional observable, with random
/// degeneracies; every level in `0..max+1` is used.
pub fn random_levels<R: Rng>(d: usize, rng: &mut R) -> Vec<usize> {
    let distinct = rng.random_range(1..=d);
    let mut levels: Vec<usize> = (0..d).map(|k| k % distinct).collect();
    levels.shuffle(rng);
    levels
}

pub fn known_observable<R: Rng>(levels: &[usize], rng: &mut R) -> KnownObservable {
    let d = levels.len();
    let u = random::unitary(d, rng).matrix().clone();
    let spacing = rng.random_range(0.5..2.0);
    let offset = rng.random_range(-1.0..1.0);
    let mut m = DMatrix::<C64>::zeros(d, d);
    for (k, &level) in levels.iter().enumerate() {
        let lambda = level as f64 * spacing + offset;
        let col = u.column(k);
        m += col * col.adjoint() * C64::new(lambda, 0.0);
    }
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let obs = Observable::new(LinearOp::new(m, vec![d]).unwrap()).unwrap();
    let count = levels.iter().max().unwrap() + 1;
    let groups = (0..count)
        .map(|n| (0..d).filter(|&k| levels[k] == n).collect())
        .collect();
    KnownObservable {
        obs,
        basis: u,
        groups,
    }
}

/// `Σ_{k ∈ group n} |⟨χ|u_k⟩|²` for the outcome ket `chi`.
pub fn bra_rule(chi: &Ket, k: &KnownObservable) -> Vec<f64> {
    let amps = chi.amplitudes();
    k.groups
        .iter()
        .map(|cols| {
            cols.iter()
                .map(|&col| {
                    let overlap: C64 = amps
                        .iter()
                        .enumerate()
                        .map(|(j, a)| a.conj() * k.basis[(j, col)])
                        .sum();
                    overlap.norm_sqr()
                })
                .sum()
        })
        .collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Half-width of the 5σ binomial band (plus rounding slack).
pub fn five_sigma(p: f64, n: usize) -> f64 {
    5.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-12
}
