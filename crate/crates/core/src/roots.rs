//! Root systems of the simple Lie algebras and the Coxeter element.
//!
//! Simple roots follow the Bourbaki numbering. Cartan subalgebra elements
//! are written in the simple-root basis, identified with the Cartan through
//! the invariant form, so the Weyl group acts on both by the same matrices.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::cyclo::Cyclo;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{fmt_rational, int, Field, Rational, Ring};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl FromStr for RootType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootType::A),
            "B" => Ok(RootType::B),
            "C" => Ok(RootType::C),
            "D" => Ok(RootType::D),
            "E" => Ok(RootType::E),
            "F" => Ok(RootType::F),
            "G" => Ok(RootType::G),
            other => Err(Error::Invalid(format!("unknown root system type {:?}", other))),
        }
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Parse labels such as `A3`, `E8` or `G2`.
pub fn parse_label(label: &str) -> Result<(RootType, usize)> {
    let label = label.trim();
    let (t, r) = label.split_at(label.chars().next().map_or(0, |c| c.len_utf8()));
    let rank = r
        .parse()
        .map_err(|_| Error::Invalid(format!("bad root system label {:?}", label)))?;
    Ok((t.parse()?, rank))
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    kind: RootType,
    rank: usize,
    cartan: Vec<Vec<i64>>,
    /// Squared root lengths divided by two; 1 for long roots.
    half_lengths: Vec<Rational>,
    positive: Vec<Vec<i64>>,
}

fn cartan_matrix(kind: RootType, l: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; l]; l];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match kind {
        RootType::A | RootType::B | RootType::C => {
            for i in 0..l - 1 {
                link(i, i + 1);
            }
        }
        RootType::D => {
            for i in 0..l - 2 {
                link(i, i + 1);
            }
            link(l - 3, l - 1);
        }
        RootType::E => {
            link(0, 2);
            link(1, 3);
            for i in 2..l - 1 {
                link(i, i + 1);
            }
        }
        RootType::F => {
            link(0, 1);
            link(1, 2);
            link(2, 3);
        }
        RootType::G => link(0, 1),
    }
    match kind {
        RootType::B => a[l - 1][l - 2] = -2,
        RootType::C => a[l - 2][l - 1] = -2,
        RootType::F => a[2][1] = -2,
        RootType::G => a[0][1] = -3,
        _ => {}
    }
    a
}

impl RootSystem {
    pub fn new(kind: RootType, rank: usize) -> Result<Self> {
        let ok = match kind {
            RootType::A => rank >= 1,
            RootType::B | RootType::C => rank >= 2,
            RootType::D => rank >= 4,
            RootType::E => {
                if rank == 6 {
                    return Err(Error::ExcludedType(format!("{}{}", kind, rank)));
                }
                rank == 7 || rank == 8
            }
            RootType::F => rank == 4,
            RootType::G => rank == 2,
        };
        if !ok {
            return Err(Error::Invalid(format!("type {} has no rank {}", kind, rank)));
        }
        let cartan = cartan_matrix(kind, rank);
        let half_lengths = symmetrizer(&cartan);
        let mut rs = RootSystem {
            kind,
            rank,
            cartan,
            half_lengths,
            positive: Vec::new(),
        };
        rs.positive = rs.reflection_closure();
        Ok(rs)
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let (t, r) = parse_label(label)?;
        Self::new(t, r)
    }

    pub fn kind(&self) -> RootType {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.rank)
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// Invariant form on the simple-root basis, long roots of length² 2.
    pub fn form(&self) -> Matrix<Rational> {
        Matrix::from_fn(self.rank, self.rank, |i, j| {
            &self.half_lengths[i] * int(self.cartan[i][j])
        })
    }

    /// Positive roots in the simple-root basis, ordered by height.
    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive
    }

    /// Positive then negative roots.
    pub fn all_roots(&self) -> Vec<Vec<i64>> {
        let mut v = self.positive.clone();
        v.extend(self.positive.iter().map(|r| r.iter().map(|x| -x).collect::<Vec<_>>()));
        v
    }

    pub fn height(root: &[i64]) -> i64 {
        root.iter().sum()
    }

    pub fn is_positive(root: &[i64]) -> bool {
        root.iter().all(|&x| x >= 0) && root.iter().any(|&x| x > 0)
    }

    /// Number of positive roots expected from the classification.
    pub fn classical_count(kind: RootType, l: usize) -> usize {
        match kind {
            RootType::A => l * (l + 1) / 2,
            RootType::B | RootType::C => l * l,
            RootType::D => l * (l - 1),
            RootType::E => [0, 0, 0, 0, 0, 0, 36, 63, 120][l],
            RootType::F => 24,
            RootType::G => 6,
        }
    }

    /// `s_i(β) = β − ⟨β, α_i^∨⟩ α_i`.
    pub fn reflect(&self, i: usize, beta: &[i64]) -> Vec<i64> {
        let c: i64 = (0..self.rank).map(|j| self.cartan[i][j] * beta[j]).sum();
        let mut out = beta.to_vec();
        out[i] -= c;
        out
    }

    fn reflection_closure(&self) -> Vec<Vec<i64>> {
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: Vec<Vec<i64>> = (0..self.rank)
            .map(|i| {
                let mut e = vec![0; self.rank];
                e[i] = 1;
                e
            })
            .collect();
        while let Some(b) = queue.pop() {
            if !seen.insert(b.clone()) {
                continue;
            }
            for i in 0..self.rank {
                let r = self.reflect(i, &b);
                if Self::is_positive(&r) && !seen.contains(&r) {
                    queue.push(r);
                }
            }
        }
        let mut v: Vec<Vec<i64>> = seen.into_iter().collect();
        v.sort_by(|a, b| Self::height(a).cmp(&Self::height(b)).then(b.cmp(a)));
        v
    }

    /// Matrix of `s_i` acting on the simple-root basis.
    pub fn reflection_matrix(&self, i: usize) -> Matrix<Rational> {
        let mut m = Matrix::identity(self.rank);
        for j in 0..self.rank {
            m[(i, j)] = &m[(i, j)] - int(self.cartan[i][j]);
        }
        m
    }

    /// `R_s = s_1 s_2 ··· s_l`.
    pub fn coxeter_matrix(&self) -> Matrix<Rational> {
        (0..self.rank).fold(Matrix::identity(self.rank), |acc, i| {
            acc.mul(&self.reflection_matrix(i))
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.kind.to_string(),
            "rank": self.rank,
            "cartan_matrix": self.cartan,
            "positive_roots": self.positive.iter().map(|r| json!({
                "root": r,
                "height": Self::height(r),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Solve `d_i A_ij = d_j A_ji` along the Dynkin diagram, long roots at 1.
fn symmetrizer(a: &[Vec<i64>]) -> Vec<Rational> {
    let l = a.len();
    let mut d: Vec<Option<Rational>> = vec![None; l];
    d[0] = Some(int(1));
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..l {
            if i != j && a[i][j] != 0 && d[j].is_none() {
                let di = d[i].clone().unwrap();
                d[j] = Some(di * int(a[i][j]) / int(a[j][i]));
                stack.push(j);
            }
        }
    }
    let d: Vec<Rational> = d.into_iter().map(Option::unwrap).collect();
    let max = d.iter().max().unwrap().clone();
    d.into_iter().map(|x| x / &max).collect()
}

/// One eigenvector of the Coxeter element.
#[derive(Clone, Debug)]
pub struct Eigenvector {
    /// Exponent `k`: the eigenvalue is `ζ_h^k`.
    pub exponent: usize,
    pub vector: Vec<Cyclo>,
    /// Index of the partner with `⟨H_p, H_σp⟩ = 1`; `σp = p` only for `k = h/2`.
    pub sigma: usize,
    /// The vector `H*_p` pairing to 1 with `H_p` and to 0 with every other
    /// eigenvector. Equals `H_σp` except when `σp = p`.
    pub dual: Vec<Cyclo>,
}

#[derive(Clone, Debug)]
pub struct CoxeterData {
    pub root_system: RootSystem,
    pub r_s: Matrix<Rational>,
    pub h: usize,
    pub exponents: Vec<usize>,
    pub eigen: Vec<Eigenvector>,
    pub orbits: Vec<Vec<Vec<i64>>>,
}

/// `⟨x, y⟩ = xᵀ B y` over the cyclotomic field.
pub fn pairing(form: &Matrix<Cyclo>, x: &[Cyclo], y: &[Cyclo]) -> Cyclo {
    let by = form.mul_vec(y);
    x.iter()
        .zip(&by)
        .fold(Cyclo::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

pub fn to_cyclo(m: &Matrix<Rational>) -> Matrix<Cyclo> {
    m.map(|x| Cyclo::from_rational(x.clone()))
}

impl CoxeterData {
    pub fn new(rs: &RootSystem) -> Self {
        let l = rs.rank();
        let r_s = rs.coxeter_matrix();
        let id = Matrix::identity(l);
        let mut h = 1;
        let mut p = r_s.clone();
        while p != id {
            p = p.mul(&r_s);
            h += 1;
        }
        let form = to_cyclo(&rs.form());
        let rc = to_cyclo(&r_s);

        let mut spaces: Vec<(usize, Vec<Vec<Cyclo>>)> = Vec::new();
        for k in 1..h {
            let z = Cyclo::root_of_unity(h as u32, k as i64);
            let m = rc.sub(&Matrix::identity(l).scale(&z));
            let ns = m.nullspace();
            if !ns.is_empty() {
                spaces.push((k, ns));
            }
        }
        let exponents: Vec<usize> = spaces
            .iter()
            .flat_map(|(k, ns)| std::iter::repeat_n(*k, ns.len()))
            .collect();

        // Index of the first eigenvector of each exponent.
        let mut start = HashMap::new();
        let mut acc = 0;
        for (k, ns) in &spaces {
            start.insert(*k, acc);
            acc += ns.len();
        }
        let mut vectors: Vec<Option<Vec<Cyclo>>> = vec![None; acc];
        let mut duals: Vec<Option<Vec<Cyclo>>> = vec![None; acc];
        let mut sigma = vec![0; acc];
        for (k, ns) in &spaces {
            let k = *k;
            let kp = h - k;
            let (s0, t0) = (start[&k], start[&kp]);
            if 2 * k == h {
                let basis = gram_schmidt(&form, ns);
                for (i, v) in basis.into_iter().enumerate() {
                    let n = pairing(&form, &v, &v).inv().expect("degenerate form");
                    duals[s0 + i] = Some(v.iter().map(|x| x.mul(&n)).collect());
                    vectors[s0 + i] = Some(v);
                    sigma[s0 + i] = s0 + i;
                }
            } else if k < kp {
                let partner = &spaces.iter().find(|(j, _)| *j == kp).unwrap().1;
                let g = Matrix::from_fn(ns.len(), partner.len(), |i, j| {
                    pairing(&form, &ns[i], &partner[j])
                });
                let c = g.inverse().expect("eigenspaces must pair nondegenerately");
                for (i, v) in ns.iter().enumerate() {
                    let w: Vec<Cyclo> = (0..l)
                        .map(|r| {
                            (0..partner.len()).fold(Cyclo::zero(), |a, j| {
                                a.add(&partner[j][r].mul(&c[(j, i)]))
                            })
                        })
                        .collect();
                    vectors[s0 + i] = Some(v.clone());
                    duals[s0 + i] = Some(w.clone());
                    vectors[t0 + i] = Some(w);
                    duals[t0 + i] = Some(v.clone());
                    sigma[s0 + i] = t0 + i;
                    sigma[t0 + i] = s0 + i;
                }
            }
        }
        let eigen = (0..acc)
            .map(|p| Eigenvector {
                exponent: exponents[p],
                vector: vectors[p].take().unwrap(),
                sigma: sigma[p],
                dual: duals[p].take().unwrap(),
            })
            .collect();

        let orbits = coxeter_orbits(rs, &r_s);
        CoxeterData {
            root_system: rs.clone(),
            r_s,
            h,
            exponents,
            eigen,
            orbits,
        }
    }

    pub fn rank(&self) -> usize {
        self.r_s.rows()
    }

    pub fn form(&self) -> Matrix<Rational> {
        self.root_system.form()
    }

    /// Apply `R_s^k` (any integer `k`) to a root.
    pub fn act(&self, k: i64, root: &[i64]) -> Vec<i64> {
        let m = if k >= 0 {
            self.r_s.pow(k as u64)
        } else {
            self.r_s.inverse().unwrap().pow(k.unsigned_abs())
        };
        let v: Vec<Rational> = root.iter().map(|&x| int(x)).collect();
        m.mul_vec(&v)
            .into_iter()
            .map(|x| x.to_integer().try_into().unwrap())
            .collect()
    }

    /// `{α ∈ Δ₊ : s^(-p) α ∉ Δ₊}`, read literally.
    pub fn delta_plus_literal(&self, p: i64) -> Vec<Vec<i64>> {
        self.root_system
            .positive_roots()
            .iter()
            .filter(|a| !RootSystem::is_positive(&self.act(-p, a)))
            .cloned()
            .collect()
    }

    /// Positive roots that stay positive under `s^(-1), ..., s^(-(p-1))` and
    /// turn negative under `s^(-p)`.
    pub fn delta_plus_newly_negative(&self, p: i64) -> Vec<Vec<i64>> {
        self.root_system
            .positive_roots()
            .iter()
            .filter(|a| {
                (1..p).all(|j| RootSystem::is_positive(&self.act(-j, a)))
                    && !RootSystem::is_positive(&self.act(-p, a))
            })
            .cloned()
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.root_system.to_json();
        let o = v.as_object_mut().unwrap();
        o.insert("coxeter_number".into(), json!(self.h));
        o.insert("exponents".into(), json!(self.exponents));
        o.insert(
            "coxeter_element".into(),
            json!(self
                .r_s
                .to_rows()
                .iter()
                .map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()),
        );
        o.insert("orbits".into(), json!(self.orbits));
        o.insert(
            "eigenvectors".into(),
            json!(self
                .eigen
                .iter()
                .map(|e| json!({
                    "exponent": e.exponent,
                    "sigma": e.sigma,
                    "vector": e.vector.iter().map(|c| c.to_text()).collect::<Vec<_>>(),
                    "conductor": self.h,
                }))
                .collect::<Vec<_>>()),
        );
        v
    }
}

fn gram_schmidt(form: &Matrix<Cyclo>, basis: &[Vec<Cyclo>]) -> Vec<Vec<Cyclo>> {
    let mut out: Vec<Vec<Cyclo>> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for u in &out {
            let c = pairing(form, &v, u).div(&pairing(form, u, u)).unwrap();
            v = v.iter().zip(u).map(|(x, y)| x.sub(&y.mul(&c))).collect();
        }
        assert!(
            !pairing(form, &v, &v).is_zero(),
            "isotropic vector in a rational eigenspace"
        );
        out.push(v);
    }
    out
}

/// Orbits of all roots under `R_s`. Each orbit starts at a positive root
/// whose predecessor is negative; orbits are sorted by their smallest
/// positive height.
pub fn coxeter_orbits(rs: &RootSystem, r_s: &Matrix<Rational>) -> Vec<Vec<Vec<i64>>> {
    let apply = |r: &[i64]| -> Vec<i64> {
        let v: Vec<Rational> = r.iter().map(|&x| int(x)).collect();
        r_s.mul_vec(&v)
            .into_iter()
            .map(|x| x.to_integer().try_into().unwrap())
            .collect()
    };
    let mut seen = HashSet::new();
    let mut orbits = Vec::new();
    for root in rs.all_roots() {
        if seen.contains(&root) {
            continue;
        }
        let mut cycle = vec![root.clone()];
        let mut cur = apply(&root);
        while cur != root {
            cycle.push(cur.clone());
            cur = apply(&cur);
        }
        for r in &cycle {
            seen.insert(r.clone());
        }
        let n = cycle.len();
        let start = (0..n)
            .find(|&i| {
                RootSystem::is_positive(&cycle[i]) && !RootSystem::is_positive(&cycle[(i + n - 1) % n])
            })
            .unwrap_or(0);
        cycle.rotate_left(start);
        orbits.push(cycle);
    }
    let key = |o: &Vec<Vec<i64>>| {
        o.iter()
            .filter(|r| RootSystem::is_positive(r))
            .map(|r| RootSystem::height(r))
            .min()
            .unwrap_or(i64::MAX)
    };
    orbits.sort_by_key(key);
    orbits
}
