//! Liouville-type classes: the inclusion lattice, three-valued membership
//! reports, the construction of nonconstant bounded finite-energy p-harmonic
//! fields from a well-separated hyperbolic pair, and the exact weighted-line
//! classification from declared tail exponents.


use serde::{Deserialize, Serialize};

use crate::ends::{
    classify_space, hyperbolic_pair_from_separation, well_separated, ClassifyConfig, PairVerdict,
    SeparationReport, Verdict,
};
use crate::energy::{harmonic_extension, ExtensionSpec, PotentialField};
use crate::error::{Error, Result};
use crate::exhaustion::{Chain, Exhaustion};
use crate::graph::ball;

/// The nine class names. H* classes quantify over p-harmonic functions,
/// Q* over quasiharmonic ones; P / B / D / BD pick positive, bounded,
/// finite-energy, and bounded finite-energy functions; Para is
/// p-parabolicity of the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LiouvilleClass {
    HP,
    HB,
    HBD,
    HD,
    QP,
    QB,
    QBD,
    QD,
    Para,
}

pub const ALL_CLASSES: [LiouvilleClass; 9] = [
    LiouvilleClass::HP,
    LiouvilleClass::HB,
    LiouvilleClass::HBD,
    LiouvilleClass::HD,
    LiouvilleClass::QP,
    LiouvilleClass::QB,
    LiouvilleClass::QBD,
    LiouvilleClass::QD,
    LiouvilleClass::Para,
];

impl LiouvilleClass {
    pub fn name(&self) -> &'static str {
        match self {
            LiouvilleClass::HP => "O^p_HP",
            LiouvilleClass::HB => "O^p_HB",
            LiouvilleClass::HBD => "O^p_HBD",
            LiouvilleClass::HD => "O^p_HD",
            LiouvilleClass::QP => "O^p_QP",
            LiouvilleClass::QB => "O^p_QB",
            LiouvilleClass::QBD => "O^p_QBD",
            LiouvilleClass::QD => "O^p_QD",
            LiouvilleClass::Para => "O^p_para",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        for c in ALL_CLASSES {
            if c.name() == t || c.name().trim_start_matches("O^p_") == t {
                return Ok(c);
            }
        }
        Err(Error::UnknownClass(s.into()))
    }

    fn index(&self) -> usize {
        ALL_CLASSES.iter().position(|c| c == self).unwrap()
    }
}

impl std::fmt::Display for LiouvilleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed inclusion diagram: HP ⊂ HB ⊂ HBD, QP ⊂ QB ⊂ QBD, QP ⊂ HP,
/// QB ⊂ HB, Para ⊂ HBD, with the equalities HBD = HD = QBD = QD.
#[derive(Debug, Clone)]
pub struct ClassLattice {
    /// subset[a][b]: membership in a implies membership in b.
    subset: [[bool; 9]; 9],
}

impl Default for ClassLattice {
    fn default() -> Self {
        Self::standard()
    }
}

impl ClassLattice {
    pub fn standard() -> Self {
        use LiouvilleClass::*;
        let mut subset = [[false; 9]; 9];
        for c in ALL_CLASSES {
            subset[c.index()][c.index()] = true;
        }
        let mut edge = |a: LiouvilleClass, b: LiouvilleClass| {
            subset[a.index()][b.index()] = true;
        };
        edge(HP, HB);
        edge(HB, HBD);
        edge(QP, QB);
        edge(QB, QBD);
        edge(QP, HP);
        edge(QB, HB);
        edge(Para, HBD);
        // equalities as two-way inclusions
        for pair in [(HBD, HD), (HBD, QBD), (HBD, QD), (HD, QBD), (HD, QD), (QBD, QD)] {
            edge(pair.0, pair.1);
            edge(pair.1, pair.0);
        }
        // transitive closure
        for k in 0..9 {
            for i in 0..9 {
                for j in 0..9 {
                    if subset[i][k] && subset[k][j] {
                        subset[i][j] = true;
                    }
                }
            }
        }
        ClassLattice { subset }
    }

    pub fn is_subset(&self, a: LiouvilleClass, b: LiouvilleClass) -> bool {
        self.subset[a.index()][b.index()]
    }

    pub fn equal(&self, a: LiouvilleClass, b: LiouvilleClass) -> bool {
        self.is_subset(a, b) && self.is_subset(b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Member,
    NonMember,
    Unknown,
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Membership::Member => "member",
            Membership::NonMember => "nonmember",
            Membership::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Per-class verdicts plus the evidence they came from.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub p: f64,
    pub memberships: Vec<(LiouvilleClass, Membership)>,
    pub evidence: Vec<String>,
}

impl ClassReport {
    pub fn unknown(p: f64) -> Self {
        ClassReport {
            p,
            memberships: ALL_CLASSES
                .iter()
                .map(|&c| (c, Membership::Unknown))
                .collect(),
            evidence: Vec::new(),
        }
    }

    pub fn get(&self, c: LiouvilleClass) -> Membership {
        self.memberships
            .iter()
            .find(|(cc, _)| *cc == c)
            .map(|(_, m)| *m)
            .unwrap_or(Membership::Unknown)
    }

    pub fn set(&mut self, c: LiouvilleClass, m: Membership, why: impl Into<String>) {
        for (cc, mm) in &mut self.memberships {
            if *cc == c {
                *mm = m;
            }
        }
        self.evidence.push(format!("{}: {} ({})", c.name(), m, why.into()));
    }

    /// Closes the report under the lattice: membership propagates to
    /// superclasses, nonmembership to subclasses. Existing contradictory
    /// assignments are left for lattice_check to flag.
    pub fn propagate(&mut self, lat: &ClassLattice) {
        loop {
            let mut changed = false;
            for a in ALL_CLASSES {
                for b in ALL_CLASSES {
                    if a == b || !lat.is_subset(a, b) {
                        continue;
                    }
                    if self.get(a) == Membership::Member && self.get(b) == Membership::Unknown {
                        self.set(b, Membership::Member, format!("lattice: {} ⊂ {}", a, b));
                        changed = true;
                    }
                    if self.get(b) == Membership::NonMember && self.get(a) == Membership::Unknown {
                        self.set(a, Membership::NonMember, format!("lattice: {} ⊂ {}", a, b));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeViolation {
    pub sub: LiouvilleClass,
    pub sup: LiouvilleClass,
}

impl std::fmt::Display for LatticeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "member of {} but nonmember of {} (edge {} ⊂ {})",
            self.sub.name(),
            self.sup.name(),
            self.sub.name(),
            self.sup.name()
        )
    }
}

/// Empty iff the memberships respect the transitive closure of the lattice
/// (equalities included).
pub fn lattice_check(report: &ClassReport) -> Vec<LatticeViolation> {
    let lat = ClassLattice::standard();
    let mut out = Vec::new();
    for a in ALL_CLASSES {
        for b in ALL_CLASSES {
            if a == b || !lat.is_subset(a, b) {
                continue;
            }
            if report.get(a) == Membership::Member && report.get(b) == Membership::NonMember {
                out.push(LatticeViolation { sub: a, sup: b });
            }
        }
    }
    out
}

/// One step of the finite-energy construction: the extension with u = 0 on
/// F_n and u = 1 on G_n, free at the truncation frontier.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructionStep {
    pub n: u32,
    pub level: u32,
    pub energy: f64,
    pub min: f64,
    pub max: f64,
    /// max - min of u_n over the oscillation window (ball of radius R_2).
    pub oscillation: f64,
    /// sup |u_n - u_{n-1}| on the unit-radius base ball.
    pub cauchy_diff: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub steps: Vec<ConstructionStep>,
    pub fields: Vec<PotentialField>,
    pub cap_f1_g1: f64,
    pub lim_cap_estimate: f64,
    pub final_oscillation: f64,
    pub stabilized: bool,
    pub pair: PairVerdict,
    pub separation: SeparationReport,
}

/// Builds the sequence u_n = extension(0 on F_n, 1 on G_n) witnessing a
/// nonconstant bounded p-harmonic function with finite energy. Requires the
/// pair to be well-separated and both chains hyperbolic; refuses otherwise.
pub fn construct_finite_energy_harmonic(
    ex: &Exhaustion,
    f: &Chain,
    g: &Chain,
    cfg: &ClassifyConfig,
    sep_levels: &[u32],
    sep_tol: f64,
) -> Result<Construction> {
    let separation = well_separated(ex, f, g, cfg.p, sep_levels, sep_tol)?;
    if !separation.separated {
        return Err(Error::Precondition(
            "Mod(F_1, G_1) does not stabilize: the pair is not well-separated".into(),
        ));
    }
    let pair = hyperbolic_pair_from_separation(ex, f, g, cfg, &separation)?;
    if !pair.both_hyperbolic {
        return Err(Error::Precondition(
            "chains are not a hyperbolic pair; the construction does not apply".into(),
        ));
    }

    let mut steps: Vec<ConstructionStep> = Vec::new();
    let mut fields: Vec<PotentialField> = Vec::new();
    for &n in &cfg.schedule {
        let level = (2 * n).max(n + 1).min(ex.levels());
        let gg = ex.graph(level)?;
        let fs = f.set_at(ex, n, level)?;
        let gs = g.set_at(ex, n, level)?;
        let ext = harmonic_extension(
            ex,
            &ExtensionSpec {
                prescribed: vec![(fs, 0.0), (gs, 1.0)],
                level,
                p: cfg.p,
                tol: cfg.solve_tol,
            },
        )?;
        let r2 = ex.radius(2.min(ex.levels()))?;
        let window = ball(&gg, ex.base(), r2)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for id in window.iter() {
            let v = ext.field.value(id)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let cauchy = match fields.last() {
            Some(prev) => {
                let r1 = ex.radius(1)?;
                let b1 = ball(&gg, ex.base(), r1)?;
                Some(ext.field.sup_diff_on(prev, &b1)?)
            }
            None => None,
        };
        steps.push(ConstructionStep {
            n,
            level,
            energy: ext.energy,
            min: ext.field.min(),
            max: ext.field.max(),
            oscillation: hi - lo,
            cauchy_diff: cauchy,
        });
        fields.push(ext.field);
    }
    let cap_f1_g1 = separation.final_value;
    let lim_cap_estimate = pair.liminf_estimate;
    let final_oscillation = steps.last().map(|s| s.oscillation).unwrap_or(0.0);
    let stabilized = steps
        .last()
        .and_then(|s| s.cauchy_diff)
        .map_or(false, |d| d <= 10.0 * cfg.thresholds.inner_tol);
    Ok(Construction {
        steps,
        fields,
        cap_f1_g1,
        lim_cap_estimate,
        final_oscillation,
        stabilized,
        pair,
        separation,
    })
}

/// Decision procedure for O^p_HBD over a set of candidate chains. A found
/// well-separated hyperbolic pair proves nonmembership (witness attached);
/// a parabolic space verdict proves membership through O^p_para; otherwise
/// the verdict is unknown (absence of a found pair proves nothing).
pub struct Decision {
    pub report: ClassReport,
    pub construction: Option<Construction>,
    pub space: Option<crate::ends::HyperbolicityVerdict>,
}

pub fn decide_o_hbd(
    ex: &Exhaustion,
    candidates: &[Chain],
    cfg: &ClassifyConfig,
    sep_levels: &[u32],
    sep_tol: f64,
) -> Result<Decision> {
    let lat = ClassLattice::standard();
    let mut report = ClassReport::unknown(cfg.p);

    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            let f = &candidates[i];
            let g = &candidates[j];
            // first sets must be disjoint on the deepest separation level
            let level = *sep_levels.iter().max().unwrap_or(&ex.levels());
            let (f1, g1) = match (f.set_at(ex, 1, level), g.set_at(ex, 1, level)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            if !f1.is_disjoint(&g1) {
                continue;
            }
            match construct_finite_energy_harmonic(ex, f, g, cfg, sep_levels, sep_tol) {
                Ok(c) => {
                    report.set(
                        LiouvilleClass::HBD,
                        Membership::NonMember,
                        format!(
                            "well-separated hyperbolic pair ({}, {}) with oscillation {:.3}",
                            f.label(),
                            g.label(),
                            c.final_oscillation
                        ),
                    );
                    report.propagate(&lat);
                    return Ok(Decision {
                        report,
                        construction: Some(c),
                        space: None,
                    });
                }
                Err(Error::Precondition(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    let space = classify_space(ex, cfg)?;
    match space.verdict {
        Verdict::Parabolic => {
            report.set(
                LiouvilleClass::Para,
                Membership::Member,
                "space classified parabolic",
            );
            report.propagate(&lat);
        }
        Verdict::Hyperbolic => {
            report.set(
                LiouvilleClass::Para,
                Membership::NonMember,
                "space classified hyperbolic",
            );
            report
                .evidence
                .push("no well-separated hyperbolic pair found; O^p_HBD unknown".into());
            report.propagate(&lat);
        }
        Verdict::Inconclusive => {
            report
                .evidence
                .push("space classification inconclusive".into());
        }
    }
    Ok(Decision {
        report,
        construction: None,
        space: Some(space),
    })
}

/// Weight on the real line with declared power tails:
/// w(x) = |x|^alpha_neg for x <= -cut, 1 on [-cut, cut], x^alpha_pos for
/// x >= cut. Tail exponents make the improper integrals decidable exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineWeight {
    pub alpha_neg: f64,
    pub alpha_pos: f64,
    pub cut: f64,
}

impl LineWeight {
    pub fn example_power(alpha: f64) -> Self {
        // |x|^alpha on the left tail, flat elsewhere
        LineWeight {
            alpha_neg: alpha,
            alpha_pos: 0.0,
            cut: 1.0,
        }
    }

    pub fn symmetric_power(alpha: f64) -> Self {
        LineWeight {
            alpha_neg: alpha,
            alpha_pos: alpha,
            cut: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= -self.cut {
            x.abs().powf(self.alpha_neg)
        } else if x >= self.cut {
            x.abs().powf(self.alpha_pos)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Integral {
    Finite(f64),
    Divergent,
}

/// Decides and evaluates int w^{1/(1-p)} over a half-line. The tail part is
/// decided symbolically from the declared exponent (converges iff
/// alpha/(1-p) < -1, i.e. alpha > p-1); the compact part uses Simpson
/// quadrature.
fn half_line_integral(w: &LineWeight, p: f64, positive_side: bool) -> Integral {
    let alpha = if positive_side { w.alpha_pos } else { w.alpha_neg };
    let q = 1.0 / (1.0 - p); // negative for p > 1
    let tail_exp = alpha * q;
    let cut = w.cut;
    // compact part: w = 1 on [0, cut]
    let compact = simpson(|_| 1.0, 0.0, cut, 64);
    if tail_exp >= -1.0 {
        return Integral::Divergent;
    }
    // int_cut^inf x^tail_exp dx = cut^(tail_exp+1) / (-tail_exp - 1)
    let tail = cut.powf(tail_exp + 1.0) / (-tail_exp - 1.0);
    Integral::Finite(compact + tail)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// The explicit nonconstant p-harmonic witness on the weighted line when
/// both half-line integrals converge: u' proportional to w^{1/(1-p)},
/// normalized to range (0, 1). Its energy is I_total^(1-p).
#[derive(Debug, Clone, Serialize)]
pub struct LineWitness {
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineClassification {
    pub p: f64,
    pub weight: LineWeight,
    pub integral_neg: Integral,
    pub integral_pos: Integral,
    pub end_neg_hyperbolic: bool,
    pub end_pos_hyperbolic: bool,
    pub report: ClassReport,
    pub summary: String,
    pub witness: Option<LineWitness>,
}

/// Exact classification of the weighted real line from Prop.-style criteria:
/// an end is p-hyperbolic iff its half-line integral of w^{1/(1-p)} is
/// finite; memberships follow from which of the two integrals converge.
pub fn classify_weighted_line(w: &LineWeight, p: f64) -> Result<LineClassification> {
    crate::energy::check_exponent(p)?;
    if !(w.cut > 0.0) || !w.alpha_neg.is_finite() || !w.alpha_pos.is_finite() {
        return Err(Error::TailUndeclared);
    }
    use LiouvilleClass::*;
    let lat = ClassLattice::standard();
    let i_neg = half_line_integral(w, p, false);
    let i_pos = half_line_integral(w, p, true);
    let hyp_neg = matches!(i_neg, Integral::Finite(_));
    let hyp_pos = matches!(i_pos, Integral::Finite(_));
    let mut report = ClassReport::unknown(p);
    let mut witness = None;
    let summary;
    match (hyp_neg, hyp_pos) {
        (false, false) => {
            // both ends parabolic: the space is parabolic, and quasi-
            // Liouville classes hold as well
            report.set(Para, Membership::Member, "both half-line integrals diverge");
            report.set(QP, Membership::Member, "parabolic line: positive quasiharmonic functions are constant");
            report.set(QD, Membership::Member, "parabolic line: finite-energy quasiharmonic functions are constant");
            summary = "O^p_para (both ends parabolic)".to_string();
        }
        (true, true) => {
            report.set(
                HBD,
                Membership::NonMember,
                "both integrals converge: explicit nonconstant bounded finite-energy witness",
            );
            witness = Some(line_witness(w, p));
            summary = "∉ O^p_HBD (both ends hyperbolic; explicit witness)".to_string();
        }
        _ => {
            // exactly one hyperbolic end
            report.set(QB, Membership::Member, "one hyperbolic end: bounded quasiharmonic functions are constant");
            report.set(QD, Membership::Member, "one hyperbolic end: finite-energy quasiharmonic functions are constant");
            report.set(HP, Membership::NonMember, "one hyperbolic end: a nonconstant positive p-harmonic function exists");
            report.set(Para, Membership::NonMember, "a hyperbolic end makes the space hyperbolic");
            summary = "(O^p_QB ∩ O^p_QD) ∖ O^p_HP".to_string();
        }
    }
    report.propagate(&lat);
    Ok(LineClassification {
        p,
        weight: *w,
        integral_neg: i_neg,
        integral_pos: i_pos,
        end_neg_hyperbolic: hyp_neg,
        end_pos_hyperbolic: hyp_pos,
        report,
        summary,
        witness,
    })
}

fn line_witness(w: &LineWeight, p: f64) -> LineWitness {
    let (i_neg, i_pos) = match (half_line_integral(w, p, false), half_line_integral(w, p, true)) {
        (Integral::Finite(a), Integral::Finite(b)) => (a, b),
        _ => unreachable!("witness only built when both integrals converge"),
    };
    let total = i_neg + i_pos;
    let span = 8.0 * w.cut.max(1.0);
    let steps = 400usize;
    let h = 2.0 * span / steps as f64;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut us = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let x = -span + i as f64 * h;
        xs.push(x);
        us.push(line_witness_value(w, p, x).unwrap_or(f64::NAN));
    }
    LineWitness {
        xs,
        us,
        energy: total.powf(1.0 - p),
    }
}

/// Shares the core of Example-style checks: u' ∝ w^{1/(1-p)} integrated on a
/// grid, for comparing discrete solves against the quadrature oracle.
pub fn line_witness_value(w: &LineWeight, p: f64, x: f64) -> Result<f64> {
    let (i_neg, i_pos) = match (half_line_integral(w, p, false), half_line_integral(w, p, true)) {
        (Integral::Finite(a), Integral::Finite(b)) => (a, b),
        _ => return Err(Error::Precondition("integrals do not both converge".into())),
    };
    let total = i_neg + i_pos;
    let q = 1.0 / (1.0 - p);
    // int_{-inf}^{x} = I_neg - int_{x}^{0} for x <= 0, I_neg + int_0^x else
    let value = if x <= 0.0 {
        i_neg - simpson(|t| w.eval(t).powf(q), x, 0.0, 2048)
    } else {
        i_neg + simpson(|t| w.eval(t).powf(q), 0.0, x, 2048)
    };
    Ok((value / total).clamp(0.0, 1.0))
}
