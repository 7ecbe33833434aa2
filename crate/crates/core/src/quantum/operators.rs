//! Single-atom, ladder and embedded two-atom operators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::space::{HilbertSpace, Level, N_ATOMS, N_LEVELS};
use super::sparse::CsrMatrix;

/// Default number of extra Fock levels used when exponentiating the
/// position operator.
pub const DEFAULT_FOCK_PADDING: usize = 8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ket_bra(dim: usize, row: usize, col: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(dim, dim, vec![(row, col, c(1.0))])
}

/// `|r><1|` on one atom.
pub fn sigma_plus() -> CsrMatrix {
    ket_bra(N_LEVELS, Level::Rydberg.index(), Level::One.index())
}

/// `|1><r|` on one atom.
pub fn sigma_minus() -> CsrMatrix {
    ket_bra(N_LEVELS, Level::One.index(), Level::Rydberg.index())
}

/// Rydberg projector `|r><r|` on one atom.
pub fn rydberg_projector() -> CsrMatrix {
    ket_bra(N_LEVELS, Level::Rydberg.index(), Level::Rydberg.index())
}

/// Truncated annihilation operator.
pub fn annihilation(n: usize) -> CsrMatrix {
    let t = (1..n).map(|k| (k - 1, k, c((k as f64).sqrt()))).collect();
    CsrMatrix::from_triplets(n, n, t)
}

pub fn creation(n: usize) -> CsrMatrix {
    annihilation(n).adjoint()
}

pub fn number(n: usize) -> CsrMatrix {
    let t = (0..n).map(|k| (k, k, c(k as f64))).collect();
    CsrMatrix::from_triplets(n, n, t)
}

/// Position `a + a^dagger` in units of `sqrt(hbar / 2 m omega)`.
pub fn position(n: usize) -> CsrMatrix {
    annihilation(n).add(&creation(n))
}

/// Momentum `i (a^dagger - a)` in units of `sqrt(hbar m omega / 2)`.
pub fn momentum(n: usize) -> CsrMatrix {
    creation(n)
        .add(&annihilation(n).scaled(c(-1.0)))
        .scaled(Complex64::new(0.0, 1.0))
}

/// Truncated matrix of `exp(i eta (a + a^dagger))`.
///
/// `eta` is the Lamb-Dicke factor `k sqrt(hbar / 2 m omega)`. The
/// exponential is evaluated exactly on a ladder of `n + padding` levels by
/// diagonalizing the real tridiagonal position matrix, then cropped to the
/// leading `n x n` block.
pub fn displacement(n: usize, eta: f64, padding: usize) -> DMatrix<Complex64> {
    if eta == 0.0 {
        return DMatrix::identity(n, n);
    }
    let big = n + padding;
    let mut x = DMatrix::<f64>::zeros(big, big);
    for k in 1..big {
        let s = (k as f64).sqrt();
        x[(k - 1, k)] = s;
        x[(k, k - 1)] = s;
    }
    let eig = SymmetricEigen::new(x);
    let vecs = eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, eta * l))
        .collect();
    DMatrix::from_fn(n, n, |r, col| {
        (0..big)
            .map(|k| phases[k] * (vecs[(r, k)] * vecs[(col, k)]))
            .sum()
    })
}

/// Weight lost from each column of a cropped displacement matrix,
/// `1 - sum_m |D_{m n}|^2`.
pub fn displacement_leakage(d: &DMatrix<Complex64>) -> Vec<f64> {
    (0..d.ncols())
        .map(|col| 1.0 - d.column(col).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect()
}

/// Embeds a product of local operators into the full space. Factors not
/// listed receive the identity. Factor indices follow
/// [`HilbertSpace::factor_dims`].
pub fn embed(space: &HilbertSpace, locals: &[(usize, &CsrMatrix)]) -> CsrMatrix {
    let dims = space.factor_dims();
    let mut out = CsrMatrix::identity(1);
    for (f, &d) in dims.iter().enumerate() {
        let mut product: Option<CsrMatrix> = None;
        for (_, op) in locals.iter().filter(|(g, _)| *g == f) {
            assert_eq!(
                op.nrows(),
                d,
                "local operator dimension mismatch on factor {f}"
            );
            product = Some(match product {
                None => (*op).clone(),
                Some(p) => p.matmul(op),
            });
        }
        let factor = product.unwrap_or_else(|| CsrMatrix::identity(d));
        out = out.kron(&factor);
    }
    out
}

/// Per-atom and pairwise operators on a given space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub sigma_plus: [CsrMatrix; N_ATOMS],
    pub sigma_minus: [CsrMatrix; N_ATOMS],
    pub rydberg: [CsrMatrix; N_ATOMS],
    pub rydberg_pair: CsrMatrix,
    pub identity: CsrMatrix,
}

impl OperatorSet {
    pub fn new(space: &HilbertSpace) -> Self {
        let sp = sigma_plus();
        let sm = sigma_minus();
        let n = rydberg_projector();
        let per_atom = |op: &CsrMatrix| [embed(space, &[(0, op)]), embed(space, &[(1, op)])];
        Self {
            sigma_plus: per_atom(&sp),
            sigma_minus: per_atom(&sm),
            rydberg: per_atom(&n),
            rydberg_pair: embed(space, &[(0, &n), (1, &n)]),
            identity: CsrMatrix::identity(space.total_dim()),
        }
    }

    /// Ladder operator `a` for the ladder occupying `factor`.
    pub fn ladder(space: &HilbertSpace, factor: usize) -> CsrMatrix {
        embed(
            space,
            &[(factor, &annihilation(space.factor_dims()[factor]))],
        )
    }

    pub fn position(space: &HilbertSpace, factor: usize) -> CsrMatrix {
        embed(space, &[(factor, &position(space.factor_dims()[factor]))])
    }

    pub fn momentum(space: &HilbertSpace, factor: usize) -> CsrMatrix {
        embed(space, &[(factor, &momentum(space.factor_dims()[factor]))])
    }
}
