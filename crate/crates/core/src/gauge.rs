//! Gauge fixing on the cell `M^s = N s⁻¹ N` of SL(n).
//!
//! Every `L ∈ M^s` has a unique `n ∈ N` with `n^τ L n⁻¹` a companion matrix.
//! Two independent algorithms compute it: a row elimination and the graded
//! recursion over root subgroups ordered by height and Coxeter orbit.

use serde_json::{json, Value};

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::loop_sl::{
    has_mcell_shape, is_in_mcell, matrix_to_json, qgauge, tau, unipotent_inverse, CanonicalOperator,
    LoopMatrix,
};
use crate::matrix::Matrix;
use crate::ratfunc::CycloRat;
use crate::ring::{rat, Ring};
use crate::roots::{CoxeterData, RootSystem, RootType};
use crate::series::{window_error, LaurentSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFixResult {
    pub n: LoopMatrix,
    pub canonical: CanonicalOperator,
}

impl GaugeFixResult {
    /// Highest mode through which every output series is determined;
    /// `None` when all outputs are exact Laurent polynomials.
    pub fn certified_hi(&self) -> Option<i64> {
        self.n
            .entries()
            .chain(self.canonical.u.iter())
            .filter_map(|s| s.precision())
            .min()
    }

    /// Fail unless all outputs are known through mode `hi`.
    pub fn require_through(&self, hi: i64) -> Result<()> {
        match self.certified_hi() {
            Some(c) if c < hi => Err(window_error(hi - c, hi)),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": matrix_to_json(&self.n),
            "canonical": {
                "u": self.canonical.u.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            },
            "certified_hi": self.certified_hi(),
        })
    }
}

fn check_input(l: &LoopMatrix) -> Result<usize> {
    let n = l.rows();
    if !l.is_square() || n < 2 {
        return Err(Error::Shape(format!(
            "expected a square matrix of size at least 2, got {}x{}",
            l.rows(),
            l.cols()
        )));
    }
    if !has_mcell_shape(l) {
        return Err(Error::Shape(
            "input must have -1 on the superdiagonal and zeros above it".into(),
        ));
    }
    if !is_in_mcell(l) {
        return Err(Error::Shape("input determinant is not 1".into()));
    }
    Ok(n)
}

/// Bottom row of the companion matrix `n^τ L n⁻¹`.
fn companion_from(l: &LoopMatrix, n: &LoopMatrix) -> Result<CanonicalOperator> {
    let size = l.rows();
    let x = tau(n, 1).mul(l);
    let ninv = unipotent_inverse(n)?;
    let bottom: Vec<LaurentSeries> = (0..size)
        .map(|c| {
            (0..size).fold(LaurentSeries::zero(), |acc, k| {
                acc.add(&x[(size - 1, k)].mul(&ninv[(k, c)]))
            })
        })
        .collect();
    Ok(CanonicalOperator::new(bottom[1..].to_vec()))
}

/// Row elimination: `row_1(n) = e_1`, `row_{i+1}(n) = −row_i(n)^τ L`.
pub fn gauge_fix_elimination(l: &LoopMatrix) -> Result<GaugeFixResult> {
    let size = check_input(l)?;
    let mut n: LoopMatrix = Matrix::identity(size);
    for i in 0..size - 1 {
        let row: Vec<LaurentSeries> = n.row(i).iter().map(|x| x.tau(1)).collect();
        for c in 0..=i {
            let v = (0..=i).fold(LaurentSeries::zero(), |acc, k| acc.add(&row[k].mul(&l[(k, c)])));
            n[(i + 1, c)] = v.neg();
        }
    }
    let canonical = companion_from(l, &n)?;
    Ok(GaugeFixResult { n, canonical })
}

/// Matrix position (0-based row, column) of the root `α_a + ... + α_b`.
fn root_position(root: &[i64]) -> (usize, usize) {
    let a = root.iter().position(|&x| x != 0).unwrap();
    let b = root.iter().rposition(|&x| x != 0).unwrap();
    debug_assert!(root[a..=b].iter().all(|&x| x == 1));
    (b + 1, a)
}

/// Positions of the root subgroups `N_k^p` in the order used by the
/// recursion: height `k` ascending, then orbit position `p` ascending.
pub fn graded_positions(size: usize) -> Vec<(usize, usize, (usize, usize))> {
    let rs = RootSystem::new(RootType::A, size - 1).expect("rank at least one");
    let cd = CoxeterData::new(&rs);
    let mut out = Vec::new();
    for (k, orbit) in cd.orbits.iter().enumerate() {
        for (p, root) in orbit.iter().take_while(|r| RootSystem::is_positive(r)).enumerate() {
            out.push((k + 1, p, root_position(root)));
        }
    }
    out
}

/// `Π (I + c_j E_j)` in the given order.
fn factor_product(size: usize, order: &[(usize, usize, (usize, usize))], c: &[LaurentSeries]) -> LoopMatrix {
    let mut acc: LoopMatrix = Matrix::identity(size);
    for ((_, _, (r, col)), cj) in order.iter().zip(c) {
        if cj.is_zero() {
            continue;
        }
        // acc · (I + c E_{r,col}) adds c · (column r of acc) to column col.
        for i in 0..size {
            let v = acc[(i, *r)].mul(cj);
            acc[(i, *col)] = acc[(i, *col)].add(&v);
        }
    }
    acc
}

/// Factor a lower unitriangular matrix as an ordered product of root factors.
fn peel(u: &LoopMatrix, order: &[(usize, usize, (usize, usize))]) -> Vec<LaurentSeries> {
    let size = u.rows();
    let mut rem = u.clone();
    let mut out = Vec::with_capacity(order.len());
    for (_, _, (r, col)) in order {
        let c = rem[(*r, *col)].clone();
        // (I − c E_{r,col}) · rem subtracts c · (row col) from row r.
        for j in 0..size {
            let v = rem[(*col, j)].mul(&c);
            rem[(*r, j)] = rem[(*r, j)].sub(&v);
        }
        out.push(c);
    }
    out
}

/// Split `X ∈ M^s` as `ṽ s⁻¹ ũ` with `ṽ ∈ N′` and `ũ ∈ N`; returns `ũ` and
/// the bottom row of `ṽ`.
pub fn decompose(x: &LoopMatrix) -> (LoopMatrix, Vec<LaurentSeries>) {
    let size = x.rows();
    let mut u: LoopMatrix = Matrix::identity(size);
    for i in 1..size {
        for c in 0..i {
            u[(i, c)] = x[(i - 1, c)].neg();
        }
    }
    // X_{n,c} = Σ_{j<n} w_j X_{j,c} for c ≥ 2, solved from the right.
    let mut w = vec![LaurentSeries::zero(); size];
    w[size - 1] = LaurentSeries::one();
    for c in (1..size).rev() {
        let mut s = x[(size - 1, c)].neg();
        for (j, wj) in w.iter().enumerate().take(size - 1).skip(c) {
            s = s.add(&wj.mul(&x[(j, c)]));
        }
        w[c - 1] = s;
    }
    (u, w)
}

/// The graded recursion. At step `(k, p)` the factor of `ũ` in
/// `n^τ L = ṽ s⁻¹ ũ` at that position depends only on factors of `n` that
/// are already fixed, and is the missing factor of `n`.
pub fn gauge_fix_recursive(l: &LoopMatrix) -> Result<GaugeFixResult> {
    let size = check_input(l)?;
    let order = graded_positions(size);
    let mut c = vec![LaurentSeries::zero(); order.len()];
    for step in 0..order.len() {
        let n = factor_product(size, &order, &c);
        let x = tau(&n, 1).mul(l);
        let (u, _) = decompose(&x);
        c[step] = peel(&u, &order).swap_remove(step);
    }
    let n = factor_product(size, &order, &c);
    let canonical = companion_from(l, &n)?;
    Ok(GaugeFixResult { n, canonical })
}

/// Dimension of the space of strictly lower `X` with Laurent polynomial
/// entries on modes `-d..=d` such that `X^τ L − L X = 0`, the tangent space
/// of the stabilizer of `L` in `N`. Computed at `q = 2/3`; a specialization
/// can only enlarge the kernel, so zero here means zero generically.
pub fn stabilizer_dimension(l: &LoopMatrix, d: i64) -> Result<usize> {
    check_input(l)?;
    if l.entries().any(|e| !e.is_exact()) {
        return Err(Error::Invalid("freeness check needs Laurent polynomial entries".into()));
    }
    let size = l.rows();
    let q0 = Cyclo::from_rational(rat(2, 3));
    let mut columns: Vec<Vec<(usize, usize, i64, Cyclo)>> = Vec::new();
    for i in 0..size {
        for j in 0..i {
            for m in -d..=d {
                let mut x: LoopMatrix = Matrix::zeros(size, size);
                x[(i, j)] = LaurentSeries::monomial(CycloRat::one(), m);
                let img = tau(&x, 1).mul(l).sub(&l.mul(&x));
                let mut col = Vec::new();
                for a in 0..size {
                    for b in 0..size {
                        for (mode, v) in img[(a, b)].modes() {
                            let val = v.eval(&q0).ok_or(Error::DivisionByZero)?;
                            col.push((a, b, mode, val));
                        }
                    }
                }
                columns.push(col);
            }
        }
    }
    let mut keys: Vec<(usize, usize, i64)> = columns
        .iter()
        .flatten()
        .map(|(a, b, m, _)| (*a, *b, *m))
        .collect();
    keys.sort();
    keys.dedup();
    let mut mat: Matrix<Cyclo> = Matrix::zeros(keys.len(), columns.len());
    for (j, col) in columns.iter().enumerate() {
        for (a, b, m, v) in col {
            let i = keys.binary_search(&(*a, *b, *m)).unwrap();
            mat[(i, j)] = mat[(i, j)].add(v);
        }
    }
    Ok(columns.len() - mat.rank())
}

/// Gauge `L` by `w` and check that the canonical form is unchanged.
pub fn canonical_is_invariant(l: &LoopMatrix, w: &LoopMatrix) -> Result<bool> {
    let a = gauge_fix_elimination(l)?;
    let b = gauge_fix_elimination(&qgauge(w, l)?)?;
    Ok(a.canonical == b.canonical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_sl::{random_mcell, random_unipotent};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(v: i64) -> LaurentSeries {
        LaurentSeries::from_i64(v)
    }

    #[test]
    fn constant_two_by_two() {
        let l = Matrix::from_rows(vec![vec![c(-1), c(-1)], vec![c(0), c(-1)]]);
        for r in [gauge_fix_elimination(&l).unwrap(), gauge_fix_recursive(&l).unwrap()] {
            assert_eq!(r.n, Matrix::from_rows(vec![vec![c(1), c(0)], vec![c(1), c(1)]]));
            assert_eq!(r.canonical.u, vec![c(-2)]);
        }
    }

    #[test]
    fn companion_is_fixed() {
        let op = CanonicalOperator::new(vec![c(3), LaurentSeries::monomial(CycloRat::q(), -1)]);
        let r = gauge_fix_recursive(&op.companion()).unwrap();
        assert_eq!(r.n, Matrix::identity(3));
        assert_eq!(r.canonical, op);
    }

    #[test]
    fn graded_order_for_sl4() {
        let pos: Vec<(usize, usize)> = graded_positions(4).iter().map(|x| x.2).collect();
        assert_eq!(pos, vec![(1, 0), (2, 1), (3, 2), (2, 0), (3, 1), (3, 0)]);
    }

    #[test]
    fn algorithms_agree_and_canonical_form_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=4 {
            let l = random_mcell(&mut rng, n, -1, 1);
            let a = gauge_fix_elimination(&l).unwrap();
            let b = gauge_fix_recursive(&l).unwrap();
            assert_eq!(a, b);
            assert_eq!(qgauge(&a.n, &l).unwrap(), a.canonical.companion());
            let w = random_unipotent(&mut rng, n, -1, 1);
            assert!(canonical_is_invariant(&l, &w).unwrap());
        }
    }

    #[test]
    fn action_is_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = random_mcell(&mut rng, 3, -1, 1);
        assert_eq!(stabilizer_dimension(&l, 2).unwrap(), 0);
    }

    #[test]
    fn shape_errors() {
        let bad = Matrix::from_rows(vec![vec![c(1), c(0)], vec![c(0), c(1)]]);
        assert!(matches!(gauge_fix_elimination(&bad), Err(Error::Shape(_))));
    }
}
