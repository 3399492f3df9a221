//! One function per subcommand. Each returns a JSON report and, for checks,
//! whether everything that was checked holds.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qws::gauge::{gauge_fix_elimination, gauge_fix_recursive};
use qws::lattice::{
    companion, jacobi_check, lattice_gauge_fix, lattice_qgauge, lattice_stabilizer_dimension,
    lattice_theta_invertible, random_lattice_unipotent, rational_matrix_to_json, theta_singular_predicted,
};
use qws::loop_sl::{det, has_mcell_shape, is_in_mcell, matrix_from_json};
use qws::miura::{fr_bracket_coeff, fr_bracket_symbol, miura_transform, verify_fraction_identity};
use qws::ring::fmt_rational;
use qws::rmatrix::{cayley_r0, r0_spectral, tangency_residual, theta};
use qws::verify::run_all;
use qws::{
    CanonicalOperator, CoxeterData, CycloRat, Error, LatticeConnection, LatticeR, Matrix, MiuraData, Result,
    RootSystem, RootType,
};

use crate::{Modes, TypeArgs};

pub struct Report {
    pub value: Value,
    /// `None` for plain computations, `Some` for checks.
    pub passed: Option<bool>,
    /// Preformatted table; the generic flattening is used when absent.
    pub table: Option<String>,
}

impl Report {
    fn value(value: Value) -> Self {
        Report { value, passed: None, table: None }
    }

    fn check(value: Value, passed: bool) -> Self {
        Report { value, passed: Some(passed), table: None }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Elimination,
    Recursive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LatticeCheck {
    Jacobi,
    Gaugefix,
    Theta,
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn text_matrix(m: &Matrix<CycloRat>) -> Value {
    json!(m.to_rows().iter().map(|r| r.iter().map(CycloRat::to_text).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn root_system(ty: &TypeArgs) -> Result<RootSystem> {
    RootSystem::from_label(&ty.label())
}

pub fn rootsys(ty: &TypeArgs) -> Result<Report> {
    Ok(Report::value(CoxeterData::new(&root_system(ty)?).to_json()))
}

pub fn rmatrix(ty: &TypeArgs, modes: Modes) -> Result<Report> {
    let cd = CoxeterData::new(&root_system(ty)?);
    let (th, cayley, spectral) = (theta(&cd), cayley_r0(&cd), r0_spectral(&cd));
    let residual = tangency_residual(&cd, &cayley);
    let mut all = true;
    let mut rows = Vec::new();
    for m in modes.lo..=modes.hi {
        let (a, b, res) = (cayley.at(m)?, spectral.at(m)?, residual.at(m)?);
        let agree = a == b;
        all &= agree && res.is_zero();
        rows.push(json!({
            "m": m,
            "theta": text_matrix(&th.at(m)?),
            "r0_cayley": text_matrix(&a),
            "r0_spectral": text_matrix(&b),
            "kernels_agree": agree,
            "tangency_residual": text_matrix(&res),
        }));
    }
    Ok(Report::check(
        json!({
            "type": cd.root_system.label(),
            "coxeter_number": cd.h,
            "modes": [modes.lo, modes.hi],
            "per_mode": rows,
        }),
        all,
    ))
}

pub fn gauge_fix(input: &Path, modes: Option<Modes>, algorithm: Algorithm, conductor: u32) -> Result<Report> {
    let l = matrix_from_json(&read_json(input)?, conductor)?;
    let result = match algorithm {
        Algorithm::Elimination => gauge_fix_elimination(&l)?,
        Algorithm::Recursive => gauge_fix_recursive(&l)?,
    };
    if let Some(w) = modes {
        result.require_through(w.hi)?;
    }
    let mut v = result.to_json();
    v["size"] = json!(l.rows());
    Ok(Report::value(v))
}

pub fn miura(n: Option<usize>, lambda: Option<&Path>, check: bool, seed: u64, conductor: u32) -> Result<Report> {
    let (md, seed) = match lambda {
        Some(path) => (MiuraData::from_json(&read_json(path)?, conductor)?, None),
        None => {
            let n = n.ok_or_else(|| Error::Invalid("either --lambda or --n is required".into()))?;
            if n < 2 {
                return Err(Error::Invalid("n must be at least 2".into()));
            }
            (MiuraData::random(&mut rng(seed), n, -2, 2, 8), Some(seed))
        }
    };
    if let Some(n) = n {
        if n != md.n() {
            return Err(Error::Shape(format!("--n {} but Λ has {} entries", n, md.n())));
        }
    }
    let canonical = miura_transform(&md);
    let mut v = json!({
        "n": md.n(),
        "seed": seed,
        "lambda": md.to_json(),
        "u": canonical.u.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
    });
    if !check {
        return Ok(Report::value(v));
    }
    let oracle = gauge_fix_elimination(&md.matrix())?;
    let agree = oracle.canonical == canonical;
    v["oracle"] = json!({ "agrees": agree, "certified_hi": oracle.certified_hi() });
    Ok(Report::check(v, agree))
}

pub fn fr_coeff(n: usize, p: usize, s: usize, m: Option<i64>) -> Result<Report> {
    let (key, c) = match m {
        Some(m) => ("coefficient", fr_bracket_coeff(n, p, s, m)?),
        // The symbol is a function of t = q^m, printed in the variable q.
        None => ("symbol", fr_bracket_symbol(n, p, s)?),
    };
    let text = c.to_text();
    let mut r = Report::value(json!({ "n": n, "p": p, "s": s, "m": m, key: text }));
    r.table = Some(format!("{}\n", text));
    Ok(r)
}

pub fn fraction_check(n: usize, d: Option<i64>, modes: Modes) -> Result<Report> {
    let ds: Vec<i64> = match d {
        Some(d) => vec![d],
        None => (0..n as i64).collect(),
    };
    let mut all = true;
    let mut cases = Vec::new();
    for &d in &ds {
        for m in (modes.lo..=modes.hi).filter(|&m| m != 0) {
            let rep = verify_fraction_identity(n, m, d)?;
            all &= rep.holds();
            cases.push(json!({
                "d": d,
                "m": m,
                "lhs": rep.lhs.to_text(),
                "rhs": rep.rhs.to_text(),
                "residual": rep.residual().to_text(),
            }));
        }
    }
    Ok(Report::check(json!({ "n": n, "modes": [modes.lo, modes.hi], "cases": cases }), all))
}

fn lattice_point(input: Option<&Path>, n: usize, len: usize, seed: u64, mcell: bool) -> Result<LatticeConnection> {
    let l = match input {
        Some(path) => LatticeConnection::from_json(&read_json(path)?)?,
        None if mcell => LatticeConnection::random_mcell(&mut rng(seed), n, len),
        None => LatticeConnection::random_sl(&mut rng(seed), n, len),
    };
    if l.n() != n || l.len() != len {
        return Err(Error::Shape(format!(
            "expected {} sites of size {}, got {} sites of size {}",
            len,
            n,
            l.len(),
            l.n()
        )));
    }
    Ok(l)
}

pub fn lattice(ty: &TypeArgs, len: usize, check: LatticeCheck, input: Option<&Path>, seed: u64) -> Result<Report> {
    let rs = root_system(ty)?;
    if len == 0 {
        return Err(Error::Invalid("the lattice needs at least one site".into()));
    }
    if check == LatticeCheck::Theta {
        let cert = lattice_theta_invertible(&rs, len);
        let predicted_singular = theta_singular_predicted(&CoxeterData::new(&rs), len);
        return Ok(Report::check(
            json!({
                "type": cert.label,
                "N": len,
                "coxeter_number": cert.coxeter_number,
                "det": fmt_rational(&cert.det),
                "invertible": cert.invertible(),
                "coprime": cert.coprime,
                "matches_coprime": cert.matches_coprime(),
                "matches_root_of_unity_criterion": cert.invertible() != predicted_singular,
            }),
            cert.matches_coprime(),
        ));
    }
    if rs.kind() != RootType::A {
        return Err(Error::Invalid(format!(
            "lattice connections are realized as matrices for type A only, got {}",
            rs.label()
        )));
    }
    let n = rs.rank() + 1;
    match check {
        LatticeCheck::Jacobi => {
            let r = LatticeR::new(n, len)?;
            let l = lattice_point(input, n, len, seed, false)?;
            let (passed, defect) = match jacobi_check(&r, &l) {
                Ok(()) => (true, Value::Null),
                Err(d) => (false, json!({ "triple": [d.triple.0, d.triple.1, d.triple.2], "value": fmt_rational(&d.value) })),
            };
            Ok(Report::check(
                json!({
                    "type": rs.label(),
                    "N": len,
                    "seed": input.is_none().then_some(seed),
                    "coordinates": r.dim(),
                    "jacobi_holds": passed,
                    "defect": defect,
                }),
                passed,
            ))
        }
        LatticeCheck::Gaugefix => {
            let l = lattice_point(input, n, len, seed, true)?;
            let fix = lattice_gauge_fix(&l)?;
            let fixed = lattice_qgauge(&fix.n, &l)?;
            let companion_ok = (0..len).all(|k| fixed.sites()[k] == companion(&fix.canonical[k]));
            let moved = lattice_qgauge(&random_lattice_unipotent(&mut rng(seed ^ 0x9a0e), n, len), &l)?;
            let invariant = lattice_gauge_fix(&moved)?.canonical == fix.canonical;
            let stabilizer = lattice_stabilizer_dimension(&l);
            let canonical: Vec<Vec<String>> =
                fix.canonical.iter().map(|u| u.iter().map(fmt_rational).collect()).collect();
            Ok(Report::check(
                json!({
                    "type": rs.label(),
                    "N": len,
                    "seed": input.is_none().then_some(seed),
                    "canonical": canonical,
                    "gauge": fix.n.iter().map(rational_matrix_to_json).collect::<Vec<_>>(),
                    "companion_form": companion_ok,
                    "invariant_under_gauge": invariant,
                    "stabilizer_dimension": stabilizer,
                }),
                companion_ok && invariant && stabilizer == 0,
            ))
        }
        LatticeCheck::Theta => unreachable!("handled above"),
    }
}

pub fn mcell_check(input: &Path, conductor: u32) -> Result<Report> {
    let m = matrix_from_json(&read_json(input)?, conductor)?;
    if !m.is_square() {
        return Err(Error::Shape(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let inside = is_in_mcell(&m);
    Ok(Report::check(
        json!({
            "shape": has_mcell_shape(&m),
            "det": det(&m).to_json(),
            "in_mcell": inside,
        }),
        inside,
    ))
}

pub fn scalar_op(input: &Path, conductor: u32) -> Result<Report> {
    let m = matrix_from_json(&read_json(input)?, conductor)?;
    let op = CanonicalOperator::from_companion(&m)?;
    Ok(Report::value(json!({
        "coefficients": op.scalar_operator().iter().map(|s| s.to_json()).collect::<Vec<_>>(),
    })))
}

pub fn verify_all(seed: u64) -> Report {
    let outcomes = run_all(seed);
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let mut table = format!("seed {}\n", seed);
    for o in &outcomes {
        table.push_str(&o.line());
        table.push('\n');
    }
    table.push_str(&format!("{} of {} criteria passed\n", passed, outcomes.len()));
    Report {
        value: json!({
            "seed": seed,
            "criteria": outcomes.iter().map(|o| o.to_json()).collect::<Vec<_>>(),
            "passed": passed,
            "total": outcomes.len(),
        }),
        passed: Some(passed == outcomes.len()),
        table: Some(table),
    }
}
