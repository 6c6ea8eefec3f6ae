//! Seeded instance generators for tests and the CLI. All randomness
//! flows through ChaCha8 keyed by the caller's 64-bit seed, so a seed
//! pins an instance byte for byte.

use crate::matrix::ComplexMatrix;
use crate::network::{ClassicalNetwork, Endpoint};
use crate::object::ClassicalObject;
use crate::povm::{stack_blocks, Povm};
use crate::spectral;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandomError {
    #[error("degenerate seed {0}: normaliser stayed singular after {1} resamples")]
    DegenerateSeed(u64, u32),
}

/// Standard-normal complex entry via Box–Muller; two uniform draws per
/// call, fixed order.
fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u.ln()).sqrt();
    Complex64::new(r * v.cos(), r * v.sin())
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// A complete POVM with `outcomes` elements on dimension `dim`:
/// normalise seeded Gaussian blocks `A_i` by `S^{-1/2}` with
/// `S = Σ A_i†A_i`, so `F_i = g_i†g_i` sums to the identity exactly by
/// construction. Returns the POVM together with the generating stack
/// `Σ_i |i⟩ ⊗ g_i` (whose blocks are generically not PSD).
///
/// A singular normaliser is resampled deterministically with an
/// incremented sub-seed; the resample count rides along in the result.
pub fn random_povm(
    dim: usize,
    outcomes: usize,
    seed: u64,
) -> Result<(Povm, RandomPovm), RandomError> {
    const MAX_RESAMPLES: u32 = 16;
    for bump in 0..MAX_RESAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(bump as u64));
        let blocks: Vec<ComplexMatrix> = (0..outcomes)
            .map(|_| gaussian_matrix(&mut rng, dim, dim))
            .collect();
        let mut s = ComplexMatrix::zeros(dim, dim);
        for a in &blocks {
            s = a
                .adjoint()
                .matmul(a)
                .and_then(|g| s.add(&g))
                .expect("uniform shapes");
        }
        let (values, vectors) = spectral::hermitian_eig(&s).expect("gram matrix");
        let smallest = values.first().copied().unwrap_or(0.0);
        if smallest < 1e-10 {
            continue;
        }
        let inv_root = ComplexMatrix::from_fn(dim, dim, |r, c| {
            (0..dim)
                .map(|k| vectors.get(r, k) * vectors.get(c, k).conj() / values[k].sqrt())
                .sum()
        });
        let normalised: Vec<ComplexMatrix> = blocks
            .iter()
            .map(|a| a.matmul(&inv_root).expect("shapes"))
            .collect();
        let elements: Vec<ComplexMatrix> = normalised
            .iter()
            .map(|g| g.adjoint().matmul(g).expect("shapes"))
            .collect();
        let povm = Povm::new(elements, true).expect("nonempty");
        let stack = stack_blocks(&normalised);
        return Ok((
            povm,
            RandomPovm {
                stack,
                resamples: bump,
            },
        ));
    }
    Err(RandomError::DegenerateSeed(seed, MAX_RESAMPLES))
}

/// Companion data of a generated POVM.
#[derive(Clone, Debug)]
pub struct RandomPovm {
    /// The stacked morphism `f` with `F_i = f̂_i† f̂_i`.
    pub stack: ComplexMatrix,
    pub resamples: u32,
}

/// A density matrix `B B† / Tr(B B†)` with seeded Gaussian `B`.
pub fn random_density(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = gaussian_matrix(&mut rng, dim, dim);
    let bb = b.matmul(&b.adjoint()).expect("square");
    let tr = bb.trace().expect("square");
    bb.scale(Complex64::new(1.0, 0.0) / tr)
}

/// A connected classical network: a random spanning tree over
/// `spiders` dots, extra random edges (possibly loops), and `m` input
/// plus `n` output ports attached to random dots.
pub fn random_network(
    obj: &ClassicalObject,
    spiders: usize,
    boundary: (usize, usize),
    seed: u64,
) -> ClassicalNetwork {
    assert!(spiders >= 1, "a connected network needs at least one dot");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = ClassicalNetwork::new(obj.clone());
    let dots: Vec<_> = (0..spiders).map(|_| net.fresh_spider()).collect();
    for i in 1..spiders {
        let j = rng.gen_range(0..i);
        net.add_edge(
            Endpoint::Spider(dots[i]),
            Endpoint::Spider(dots[j]),
            crate::network::EdgeKind::Wire,
        );
    }
    let extra = rng.gen_range(0..=spiders);
    for _ in 0..extra {
        let i = rng.gen_range(0..spiders);
        let j = rng.gen_range(0..spiders);
        net.add_edge(
            Endpoint::Spider(dots[i]),
            Endpoint::Spider(dots[j]),
            crate::network::EdgeKind::Wire,
        );
    }
    let (m, n) = boundary;
    for _ in 0..m {
        let p = net.fresh_port();
        let s = dots[rng.gen_range(0..spiders)];
        net.add_edge(
            Endpoint::Port(p),
            Endpoint::Spider(s),
            crate::network::EdgeKind::Wire,
        );
        net.inputs.push(p);
    }
    for _ in 0..n {
        let p = net.fresh_port();
        let s = dots[rng.gen_range(0..spiders)];
        net.add_edge(
            Endpoint::Spider(s),
            Endpoint::Port(p),
            crate::network::EdgeKind::Wire,
        );
        net.outputs.push(p);
    }
    net
}
