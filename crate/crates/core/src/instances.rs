//! Random game generators for tests, benchmarks and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::{PayoffMatrix, SimplexVector};

/// Entries uniform in `[0, max_entry]`, about half of them zeroed, plus a random
/// Hamiltonian cycle of entries in `[max_entry / 10, max_entry]` so the matrix is irreducible.
pub fn random_irreducible<R: Rng + ?Sized>(rng: &mut R, n: usize, max_entry: f64) -> PayoffMatrix {
    let mut data: Vec<f64> = (0..n * n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random_range(0.0..=max_entry)
            }
        })
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    for k in 0..n {
        let (i, j) = (perm[k], perm[(k + 1) % n]);
        if i != j {
            data[i * n + j] = rng.random_range(max_entry / 10.0..=max_entry);
        }
    }
    if n == 1 {
        data[0] = rng.random_range(max_entry / 10.0..=max_entry);
    }
    PayoffMatrix::from_flat(n, data).expect("entries are nonnegative")
}

/// Zero diagonal, as in a zero-sum game without collision payoffs.
pub fn random_irreducible_zero_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_entry: f64,
) -> PayoffMatrix {
    let m = random_irreducible(rng, n, max_entry);
    PayoffMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { m.get(i, j) }).unwrap()
}

/// A reducible matrix with no zero column, built from layers of strongly connected blocks.
///
/// Blocks in the first layer are the sources of the graph; each later block receives at
/// least one edge from an earlier layer. Diagonal entries are positive and vertices are
/// relabelled at random. Returns the matrix and the number of source blocks.
pub fn random_layered_reducible<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (PayoffMatrix, usize) {
    assert!(n >= 2);
    // block sizes
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=left.min(3));
        sizes.push(s);
        left -= s;
    }
    if sizes.len() == 1 {
        sizes = vec![n - 1, 1];
    }
    let blocks = sizes.len();
    let sources = rng.random_range(1..blocks);
    let mut layer = vec![0usize; blocks];
    for (b, l) in layer.iter_mut().enumerate().skip(sources) {
        *l = rng.random_range(1..=(b - sources + 1).min(3));
    }

    let mut starts = vec![0usize; blocks];
    for b in 1..blocks {
        starts[b] = starts[b - 1] + sizes[b - 1];
    }
    let mut data = vec![0.0; n * n];
    for b in 0..blocks {
        let block = random_irreducible(rng, sizes[b], 5.0);
        for i in 0..sizes[b] {
            for j in 0..sizes[b] {
                data[(starts[b] + i) * n + starts[b] + j] = block.get(i, j);
            }
        }
        for i in 0..sizes[b] {
            let v = starts[b] + i;
            data[v * n + v] = rng.random_range(0.5..=5.0);
        }
    }
    for b in sources..blocks {
        let earlier: Vec<usize> = (0..blocks).filter(|&c| layer[c] < layer[b]).collect();
        let from = earlier[rng.random_range(0..earlier.len())];
        let i = starts[from] + rng.random_range(0..sizes[from]);
        let j = starts[b] + rng.random_range(0..sizes[b]);
        data[i * n + j] = rng.random_range(0.5..=5.0);
        for &c in &earlier {
            for _ in 0..2 {
                if rng.random_bool(0.3) {
                    let i = starts[c] + rng.random_range(0..sizes[c]);
                    let j = starts[b] + rng.random_range(0..sizes[b]);
                    data[i * n + j] = rng.random_range(0.1..=5.0);
                }
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let m = PayoffMatrix::from_flat(n, data).unwrap();
    (m.permuted(&perm), sources)
}

/// Simplex vector whose entries are at least `floor / n` (before normalization).
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> SimplexVector {
    let w: Vec<f64> = (0..n).map(|_| floor + rng.random::<f64>()).collect();
    SimplexVector::normalized(w).unwrap()
}
