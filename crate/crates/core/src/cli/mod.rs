//! Pipeline orchestration and reports for the `ellsurf` binary.

pub mod parse;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exactcore::rat::rat_to_string;
use crate::exactcore::{Place, RatFunc};
use crate::gaussmanin::{classify_singularity, fuchs_relation_sum, manin_map, picard_fuchs, DiffOp2, OperatorError, SingKind};
use crate::idrcohomology::{classify_class, hodge_search, IdrError, PoleDivisor};
use crate::invariants::{compare_isogeny_invariants, surface_invariants, IsogenyComparison, SurfaceInvariants};
use crate::monodromy::{local_monodromies, MonodromyConfig, MonodromyError};
use crate::weiermodel::{ModelError, WeierstrassModel};

pub use parse::{parse_expr, parse_family, FamilySpec, ParseError};

pub const SCHEMA: &str = "ellsurf-report/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Operator(OperatorError),
    #[error(transparent)]
    Monodromy(MonodromyError),
    #[error("{what} {value:e} exceeds margin {margin:e}")]
    Margin { what: String, value: f64, margin: f64 },
    #[error(transparent)]
    Search(IdrError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::Model(m) => CliError::Model(m),
            e => CliError::Operator(e),
        }
    }
}

impl From<MonodromyError> for CliError {
    fn from(e: MonodromyError) -> Self {
        match e {
            MonodromyError::Operator(o) => o.into(),
            e => CliError::Monodromy(e),
        }
    }
}

impl From<IdrError> for CliError {
    fn from(e: IdrError) -> Self {
        match e {
            IdrError::Operator(o) => o.into(),
            e => CliError::Search(e),
        }
    }
}

impl CliError {
    /// 2 for parse or validation failures, 3 for numeric tolerance failures, 4 for an exhausted search.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Model(_) | CliError::Operator(_) | CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Monodromy(_) | CliError::Margin { .. } => 3,
            CliError::Search(_) => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    PicardFuchs,
    Monodromy,
    Idr,
    Manin,
    Compare,
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "analyze" => Command::Analyze,
            "picard-fuchs" => Command::PicardFuchs,
            "monodromy" => Command::Monodromy,
            "idr" => Command::Idr,
            "manin" => Command::Manin,
            "compare" => Command::Compare,
            _ => return Err(CliError::Usage(format!("unknown command `{s}`"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Analyze => "analyze",
            Command::PicardFuchs => "picard-fuchs",
            Command::Monodromy => "monodromy",
            Command::Idr => "idr",
            Command::Manin => "manin",
            Command::Compare => "compare",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flags {
    pub tol: f64,
    pub margin: f64,
    pub search_bound: i64,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { tol: 1e-9, margin: 1e-6, search_bound: 24 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyBlock {
    pub name: String,
    pub variable: String,
    /// `a1, a2, a3, a4, a6` rendered exactly.
    pub coefficients: Vec<String>,
    pub discriminant: String,
    pub j: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberRow {
    pub place: String,
    pub degree: usize,
    pub kodaira: String,
    pub vc4: String,
    pub vc6: String,
    pub vdelta: i64,
    pub m: i64,
    pub e_loc: i64,
    pub trace: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub place: String,
    pub rho1: String,
    pub rho2: String,
    pub kind: String,
    pub logarithmic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardFuchsBlock {
    pub p: String,
    pub q: String,
    /// Integral primitive coefficients of `D^2`, `D`, `1` after clearing denominators.
    pub cleared: Vec<String>,
    pub exponents: Vec<ExponentRow>,
    pub fuchs_relation_sum: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopRow {
    pub place: String,
    /// `None` for the loop around infinity.
    pub root: Option<[f64; 2]>,
    pub trace: [f64; 2],
    pub det: [f64; 2],
    pub kodaira_trace: i64,
    pub trace_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyBlock {
    pub tolerance: f64,
    pub margin: f64,
    pub base: [f64; 2],
    pub loops: Vec<LoopRow>,
    pub infinity: LoopRow,
    pub product_residual: f64,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorRow {
    /// `(place, order)` in quadratic-differential normalization.
    pub orders: Vec<(String, i64)>,
    pub intrinsic_degree: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdrBlock {
    pub expected_dimension: i64,
    pub p_g: i64,
    pub h11_prime: i64,
    pub search_bound: i64,
    pub a0: DivisorRow,
    pub a: DivisorRow,
    pub a0_basis: Vec<String>,
    pub a_basis: Vec<String>,
    pub stabilized_at: Option<DivisorRow>,
    pub stabilized_dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManinRow {
    pub section: (String, String),
    pub z: String,
    pub parabolic: bool,
    pub exact: bool,
    /// Places with nonvanishing local obstructions.
    pub obstructed_at: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub family: Vec<FamilyBlock>,
    pub invariants: Vec<SurfaceInvariants>,
    pub fibers: Vec<Vec<FiberRow>>,
    pub picard_fuchs: Option<PicardFuchsBlock>,
    pub monodromy: Option<MonodromyBlock>,
    pub idr: Option<IdrBlock>,
    pub manin: Option<Vec<ManinRow>>,
    pub comparison: Option<IsogenyComparison>,
}

impl Report {
    fn new(command: Command) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            family: Vec::new(),
            invariants: Vec::new(),
            fibers: Vec::new(),
            picard_fuchs: None,
            monodromy: None,
            idr: None,
            manin: None,
            comparison: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn place_name(p: &Place, var: &str) -> String {
    p.name_with(var)
}

fn family_block(spec: &FamilySpec) -> Result<FamilyBlock, CliError> {
    let v = spec.variable.as_str();
    let inv = spec.model.validate()?;
    Ok(FamilyBlock {
        name: spec.name.clone(),
        variable: v.to_string(),
        coefficients: spec.model.coefficients().iter().map(|c| c.display_with(v)).collect(),
        discriminant: inv.disc.display_with(v),
        j: inv.j.display_with(v),
    })
}

fn fiber_rows(model: &WeierstrassModel, var: &str) -> Vec<FiberRow> {
    model
        .fiber_table()
        .into_iter()
        .map(|d| FiberRow {
            place: place_name(&d.place, var),
            degree: d.place.degree(),
            kodaira: d.kodaira.to_string(),
            vc4: d.vc4.to_string(),
            vc6: d.vc6.to_string(),
            vdelta: d.vdelta,
            m: d.m,
            e_loc: d.e_loc,
            trace: d.trace,
        })
        .collect()
}

fn pf_block(spec: &FamilySpec, op: &DiffOp2) -> Result<PicardFuchsBlock, CliError> {
    let v = spec.variable.as_str();
    let (a2, a1, a0) = op.cleared();
    let mut places = op.singular_places();
    if !places.contains(&Place::Infinity) {
        places.push(Place::Infinity);
    }
    let mut exponents = Vec::new();
    for p in &places {
        let sp = classify_singularity(op, p, &spec.model)?;
        exponents.push(ExponentRow {
            place: place_name(p, v),
            rho1: rat_to_string(&sp.exponents.0),
            rho2: rat_to_string(&sp.exponents.1),
            kind: match sp.kind {
                SingKind::TrueSingular => "singular".to_string(),
                SingKind::Apparent => "apparent".to_string(),
            },
            logarithmic: sp.logarithmic,
        });
    }
    Ok(PicardFuchsBlock {
        p: op.p.display_with(v),
        q: op.q.display_with(v),
        cleared: [a2, a1, a0].iter().map(|c| c.display_with(v).to_string()).collect(),
        exponents,
        fuchs_relation_sum: rat_to_string(&fuchs_relation_sum(op)?),
    })
}

fn kodaira_trace_at(model: &WeierstrassModel, place: &Place) -> i64 {
    model.fiber_table().into_iter().find(|d| &d.place == place).map_or(2, |d| d.trace)
}

fn monodromy_block(spec: &FamilySpec, op: &DiffOp2, flags: &Flags) -> Result<MonodromyBlock, CliError> {
    let v = spec.variable.as_str();
    let cfg = MonodromyConfig { tol: flags.tol, ..MonodromyConfig::default() };
    let data = local_monodromies(op, None, cfg)?;
    let row = |place: &Place, root: Option<[f64; 2]>, m: &crate::monodromy::MonodromyMatrix| {
        let kt = kodaira_trace_at(&spec.model, place);
        let tr = m.trace();
        let det = m.det();
        LoopRow {
            place: place_name(place, v),
            root,
            trace: [tr.re, tr.im],
            det: [det.re, det.im],
            kodaira_trace: kt,
            trace_matches: (tr.re - kt as f64).abs() <= flags.margin && tr.im.abs() <= flags.margin,
        }
    };
    let loops: Vec<LoopRow> = data.local.iter().map(|(sp, m)| row(&sp.place, Some([sp.root.re, sp.root.im]), m)).collect();
    let infinity = row(&Place::Infinity, None, &data.infinity);
    if data.product_residual > flags.margin {
        return Err(CliError::Margin { what: "ordered product residual".into(), value: data.product_residual, margin: flags.margin });
    }
    Ok(MonodromyBlock {
        tolerance: flags.tol,
        margin: flags.margin,
        base: [data.base.re, data.base.im],
        loops,
        infinity,
        product_residual: data.product_residual,
        error_estimate: data.error_estimate,
    })
}

fn divisor_row(d: &PoleDivisor, places: &[Place], var: &str) -> DivisorRow {
    DivisorRow {
        orders: places.iter().map(|p| (place_name(p, var), d.intrinsic_order(p))).collect(),
        intrinsic_degree: d.intrinsic_degree(),
    }
}

fn idr_block(spec: &FamilySpec, op: &DiffOp2, flags: &Flags) -> Result<IdrBlock, CliError> {
    let v = spec.variable.as_str();
    let h = hodge_search(&spec.model, op, flags.search_bound)?;
    let mut places = op.singular_places();
    if !places.contains(&Place::Infinity) {
        places.push(Place::Infinity);
    }
    let show = |fs: &[RatFunc]| fs.iter().map(|f| f.display_with(v)).collect::<Vec<_>>();
    Ok(IdrBlock {
        expected_dimension: h.expected,
        p_g: h.p_g,
        h11_prime: h.h11_prime,
        search_bound: flags.search_bound,
        a0: divisor_row(&h.a0, &places, v),
        a: divisor_row(&h.a, &places, v),
        a0_basis: show(&h.a0_basis),
        a_basis: show(&h.a_basis),
        stabilized_at: h.stabilized.as_ref().map(|(d, _)| divisor_row(d, &places, v)),
        stabilized_dimension: h.stabilized.as_ref().map(|(_, n)| *n),
    })
}

fn manin_rows(spec: &FamilySpec, op: &DiffOp2) -> Result<Vec<ManinRow>, CliError> {
    let v = spec.variable.as_str();
    let mut rows = Vec::new();
    for (s, (xs, ys)) in spec.sections.iter().zip(&spec.section_text) {
        let z = manin_map(&spec.model, op, Some(s))?;
        let class = classify_class(op, &z)?;
        rows.push(ManinRow {
            section: (xs.clone(), ys.clone()),
            z: z.display_with(v),
            parabolic: class.is_parabolic(),
            exact: class.is_exact,
            obstructed_at: class.certificates.iter().filter(|c| !c.locally_exact).map(|c| place_name(&c.place, v)).collect(),
        });
    }
    Ok(rows)
}

/// Runs `command` on one family (two for `compare`).
pub fn run(command: Command, specs: &[FamilySpec], flags: &Flags) -> Result<Report, CliError> {
    let need = if command == Command::Compare { 2 } else { 1 };
    if specs.len() != need {
        return Err(CliError::Usage(format!("`{command}` takes {need} family file(s), got {}", specs.len())));
    }
    let mut report = Report::new(command);
    for s in specs {
        report.family.push(family_block(s)?);
    }
    let spec = &specs[0];
    let v = spec.variable.as_str();
    if command == Command::Compare {
        for s in specs {
            report.invariants.push(surface_invariants(&s.model)?);
            report.fibers.push(fiber_rows(&s.model, &s.variable));
        }
        report.comparison = Some(compare_isogeny_invariants(&specs[0].model, &specs[1].model)?);
        return Ok(report);
    }
    report.invariants.push(surface_invariants(&spec.model)?);
    report.fibers.push(fiber_rows(&spec.model, v));
    let op = picard_fuchs(&spec.model)?;
    if matches!(command, Command::Analyze | Command::PicardFuchs | Command::Monodromy) {
        report.picard_fuchs = Some(pf_block(spec, &op)?);
    }
    if matches!(command, Command::Analyze | Command::Monodromy) {
        report.monodromy = Some(monodromy_block(spec, &op, flags)?);
    }
    if matches!(command, Command::Analyze | Command::Manin | Command::Idr) {
        report.manin = Some(manin_rows(spec, &op)?);
    }
    if matches!(command, Command::Analyze | Command::Idr) {
        report.idr = Some(idr_block(spec, &op, flags)?);
    }
    Ok(report)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, fam) in self.family.iter().enumerate() {
            let _ = writeln!(out, "family {} (variable {})", fam.name, fam.variable);
            for (k, c) in ["a1", "a2", "a3", "a4", "a6"].iter().zip(&fam.coefficients) {
                let _ = writeln!(out, "  {k} = {c}");
            }
            let _ = writeln!(out, "  discriminant = {}", fam.discriminant);
            let _ = writeln!(out, "  j = {}", fam.j);
            if let Some(fibers) = self.fibers.get(i) {
                let _ = writeln!(out, "fibers:");
                for r in fibers {
                    let _ = writeln!(
                        out,
                        "  {:<28} deg {:<2} {:<5} m = {:<2} e = {:<2} vc4 = {} vc6 = {} vdelta = {}",
                        r.place, r.degree, r.kodaira, r.m, r.e_loc, r.vc4, r.vc6, r.vdelta
                    );
                }
            }
            if let Some(s) = self.invariants.get(i) {
                let _ = writeln!(
                    out,
                    "invariants: e = {}, chi = {}, p_g = {}, q = {}, b2 = {}, h11 = {}, sum(m-1) = {}, rank bound = {}, deg j = {}",
                    s.e, s.chi, s.p_g, s.q, s.b2, s.h11, s.sum_m_minus_1, s.rank_bound, s.j_degree
                );
                let _ = writeln!(out, "shioda-tate: rho = r + 2 + {} <= h11 = {}", s.sum_m_minus_1, s.h11);
            }
        }
        if let Some(pf) = &self.picard_fuchs {
            let _ = writeln!(out, "picard-fuchs: D^2 + ({}) D + ({})", pf.p, pf.q);
            let _ = writeln!(out, "  cleared: ({}) D^2 + ({}) D + ({})", pf.cleared[0], pf.cleared[1], pf.cleared[2]);
            for e in &pf.exponents {
                let _ = writeln!(
                    out,
                    "  {:<28} exponents ({}, {}) {}{}",
                    e.place,
                    e.rho1,
                    e.rho2,
                    e.kind,
                    if e.logarithmic { ", logarithmic" } else { "" }
                );
            }
            let _ = writeln!(out, "  fuchs relation sum = {}", pf.fuchs_relation_sum);
        }
        if let Some(m) = &self.monodromy {
            let _ = writeln!(out, "monodromy (tol {:e}, margin {:e}):", m.tolerance, m.margin);
            for l in m.loops.iter().chain(std::iter::once(&m.infinity)) {
                let _ = writeln!(
                    out,
                    "  {:<28} {:<28} trace {:.6} (kodaira {}, {})",
                    l.place,
                    l.root.map_or("loop around infinity".to_string(), |r| format!("root {:.6}{:+.6}i", r[0], r[1])),
                    l.trace[0],
                    l.kodaira_trace,
                    if l.trace_matches { "match" } else { "MISMATCH" }
                );
            }
            let _ = writeln!(out, "  ordered product residual {:.3e}, error estimate {:.3e}", m.product_residual, m.error_estimate);
        }
        if let Some(rows) = &self.manin {
            for r in rows {
                let _ = writeln!(out, "manin ({}, {}): Z = {}", r.section.0, r.section.1, r.z);
                let _ = writeln!(out, "  parabolic: {}, exact: {}", yes(r.parabolic), yes(r.exact));
                if !r.obstructed_at.is_empty() {
                    let _ = writeln!(out, "  obstructed at: {}", r.obstructed_at.join(", "));
                }
            }
        }
        if let Some(idr) = &self.idr {
            let fmt_div = |d: &DivisorRow| d.orders.iter().map(|(p, k)| format!("{k}*[{p}]")).collect::<Vec<_>>().join(" + ");
            let _ = writeln!(out, "idr: expected dimension {} (p_g = {}, h11' = {})", idr.expected_dimension, idr.p_g, idr.h11_prime);
            let _ = writeln!(out, "  A0 = {} (degree {}), basis [{}]", fmt_div(&idr.a0), idr.a0.intrinsic_degree, idr.a0_basis.join(", "));
            let _ = writeln!(out, "  A  = {} (degree {}), {} representatives", fmt_div(&idr.a), idr.a.intrinsic_degree, idr.a_basis.len());
            match (&idr.stabilized_at, idr.stabilized_dimension) {
                (Some(d), Some(n)) => {
                    let _ = writeln!(out, "  quotient dimension {n} reached at {}", fmt_div(d));
                }
                _ => {
                    let _ = writeln!(out, "  expected dimension not reached within degree {}", idr.search_bound);
                }
            }
        }
        if let Some(c) = &self.comparison {
            let _ = writeln!(out, "comparison: {}", c.verdict);
            for r in &c.rows {
                let _ = writeln!(out, "  {:<14} {:<24} {:<24} {}", r.name, r.left, r.right, if r.equal { "=" } else { "!=" });
            }
            let _ = writeln!(out, "  note: {}", c.note);
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> FamilySpec {
        parse_family(text).unwrap()
    }

    #[test]
    fn analyze_legendre() {
        let r = run(Command::Analyze, &[spec("name = legendre\nvariable = l\na2 = -(1+l); a4 = l")], &Flags::default()).unwrap();
        let kinds: Vec<&str> = r.fibers[0].iter().map(|f| f.kodaira.as_str()).collect();
        assert_eq!(kinds, ["I2", "I2", "I2*"]);
        assert_eq!((r.invariants[0].e, r.invariants[0].rank_bound), (12, 0));
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_string().contains("I2*"));
    }

    #[test]
    fn manin_rank_one() {
        let r = run(Command::Manin, &[spec("a4 = t; a6 = 1\nsection = (0, 1)")], &Flags::default()).unwrap();
        let row = &r.manin.unwrap()[0];
        assert!(row.parabolic && !row.exact);
        assert_eq!(parse_expr(&row.z, "t").unwrap().to_string(), row.z);
    }

    #[test]
    fn isotrivial_exit_code() {
        let e = run(Command::Analyze, &[spec("a6 = 1")], &Flags::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("isotrivial: j is constant"));
    }
}
