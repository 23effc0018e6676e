use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::One;

use super::problem::{Bounds, BoundsOverride, GuessFile, Mode, PhiEntry, ProblemFile, Rat, SeriesLiteral, WitnessSpec};
use super::{Command, EntryReport, GuessReport, Minimality, Report, Verdict, WitnessReport, WitnessSource};
use crate::algdep::{AlgdepError, RelationResult};
use crate::cr::{
    build_psi, hypersurface_entries, levi_minimal_sufficient, obstruction_matrix, polar_rigid_test, search_witness,
    tube_family_expr, CrError, PolarProfile, TubeSpec, Witness,
};
use crate::expr::{parse, taylor, Expr};
use crate::series::{ExponentVector, Series};

/// Command-line choices layered over the problem file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Wins over the file's `bounds`.
    pub bounds: BoundsOverride,
    /// Wins over the file's `witness`.
    pub witness: Option<WitnessSpec>,
    pub assume_family: bool,
    pub timings: bool,
}

struct Clock {
    on: bool,
    stages: BTreeMap<String, u64>,
    last: Instant,
}

impl Clock {
    fn new(on: bool) -> Self {
        Self {
            on,
            stages: BTreeMap::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        if self.on {
            let ms = now.duration_since(self.last).as_millis();
            self.stages
                .insert(stage.to_string(), u64::try_from(ms).unwrap_or(u64::MAX));
        }
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<String, u64>> {
        self.on.then_some(self.stages)
    }
}

fn phi_series(entry: &PhiEntry, index: usize, m: usize, order: u32) -> Result<Series, String> {
    match entry {
        PhiEntry::Expr(text) => {
            let e = parse(text, m).map_err(|e| format!("phi[{}]: {e}", index + 1))?;
            taylor(&e, m, order).map_err(|e| format!("phi[{}]: {e}", index + 1))
        }
        PhiEntry::Series(lit) => lit
            .to_series(m)
            .map(|s| s.truncate(order))
            .map_err(|e| format!("phi[{}]: {e}", index + 1)),
    }
}

fn witness_from_spec(t: &TubeSpec, spec: &WitnessSpec) -> Result<Witness, CrError> {
    if spec.ks.contains(&0) {
        return Err(CrError::InvalidWitness("indices k are 1-based".into()));
    }
    Witness::new(
        t,
        spec.betas.iter().map(|b| ExponentVector::new(b.clone())).collect(),
        spec.ks.iter().map(|k| k - 1).collect(),
    )
}

fn witness_report(t: &TubeSpec, w: &Witness, source: WitnessSource) -> Result<WitnessReport, CrError> {
    let psi = build_psi(t, w)?;
    let jac = w.jacobian_at_origin(t);
    Ok(WitnessReport {
        betas: w.betas().iter().map(|b| b.as_slice().to_vec()).collect(),
        ks: w.ks().iter().map(|k| k + 1).collect(),
        source,
        jacobian_at_origin: (0..jac.rows())
            .map(|i| jac.row(i).iter().map(|x| Rat(x.clone())).collect())
            .collect(),
        dropped_constants: psi.constants.into_iter().map(Rat).collect(),
    })
}

fn fail(mut r: Report, error: impl ToString) -> Report {
    r.verdict = Verdict::InputError;
    r.message = "input error; no verdict".into();
    r.error = Some(error.to_string());
    r
}

fn resolve_bounds(p: &ProblemFile, opts: &RunOptions) -> Bounds {
    Bounds::resolve(p.var_count(), &opts.bounds.or(&p.bounds.unwrap_or_default()))
}

fn load_tube(p: &ProblemFile, order: u32) -> Result<TubeSpec, String> {
    if p.mode != Mode::Tube {
        return Err("expected a problem with mode \"tube\"".into());
    }
    if p.d == 0 || p.d >= p.n {
        return Err(CrError::Dimensions { n: p.n, d: p.d }.to_string());
    }
    if p.d > 9 || p.n - p.d > 9 {
        return Err("at most 9 base variables and 9 defining functions are supported".into());
    }
    let m = p.var_count();
    let phi = p
        .phi
        .iter()
        .enumerate()
        .map(|(i, e)| phi_series(e, i, m, order))
        .collect::<Result<Vec<_>, _>>()?;
    TubeSpec::new(p.n, p.d, phi).map_err(|e| e.to_string())
}

fn minimality(t: &TubeSpec) -> Minimality {
    match levi_minimal_sufficient(t) {
        Ok(true) => Minimality::True,
        _ => Minimality::Unchecked,
    }
}

/// Witness from options or file, else by search. `Ok(None)` means the search
/// came back empty.
fn pick_witness(
    t: &TubeSpec,
    p: &ProblemFile,
    opts: &RunOptions,
    max_order: u32,
) -> Result<Option<(Witness, WitnessSource)>, CrError> {
    match opts.witness.as_ref().or(p.witness.as_ref()) {
        Some(spec) => Ok(Some((witness_from_spec(t, spec)?, WitnessSource::User))),
        None => Ok(search_witness(t, max_order).map(|w| (w, WitnessSource::Search))),
    }
}

impl ProblemFile {
    /// Expand a tube problem to `order`.
    pub fn tube_spec(&self, order: u32) -> Result<TubeSpec, String> {
        load_tube(self, order)
    }
}

fn expansion_order(b: &Bounds, p: &ProblemFile, opts: &RunOptions) -> u32 {
    let user_len = opts
        .witness
        .as_ref()
        .or(p.witness.as_ref())
        .and_then(|w| w.betas.iter().map(|b| b.iter().sum::<u32>()).max())
        .unwrap_or(0);
    b.order + b.validate_bump + b.max_witness_order.max(user_len) + 2
}

fn config_error(e: CrError) -> String {
    match e {
        CrError::Algdep(AlgdepError::Underdetermined { .. }) => format!("bounds rejected: {e}"),
        e => e.to_string(),
    }
}

/// Run the pipeline selected by the problem's mode.
pub fn run(p: &ProblemFile, opts: &RunOptions) -> Report {
    match p.mode {
        Mode::Tube => run_tube(p, opts),
        Mode::RigidPolar => run_polar(p, opts),
    }
}

fn run_tube(p: &ProblemFile, opts: &RunOptions) -> Report {
    let mut clock = Clock::new(opts.timings);
    let mut r = Report::empty(Command::Obstruct, Some(p.clone()));
    r.assumptions.family_membership_asserted |= opts.assume_family;
    let bounds = resolve_bounds(p, opts);
    r.bounds = Some(bounds);
    let t = match load_tube(p, expansion_order(&bounds, p, opts)) {
        Ok(t) => t,
        Err(e) => return fail(r, e),
    };
    r.minimality = minimality(&t);
    clock.lap("expand");

    let (w, source) = match pick_witness(&t, p, opts, bounds.max_witness_order) {
        Ok(Some(found)) => found,
        Ok(None) => {
            r.verdict = Verdict::NotFinitelyNondegenerateUpToOrder;
            r.message = format!(
                "no finite-nondegeneracy witness with multiindices of length <= {}",
                bounds.max_witness_order
            );
            r.timings_ms = clock.finish();
            return r;
        }
        Err(e) => return fail(r, e),
    };
    match witness_report(&t, &w, source) {
        Ok(wr) => r.witness = Some(wr),
        Err(e) => return fail(r, e),
    }
    clock.lap("witness");

    let gb = bounds.guess();
    let mat = match obstruction_matrix(&t, &w, gb.series_order()) {
        Ok(mat) => mat,
        Err(e) => return fail(r, config_error(e)),
    };
    clock.lap("reversion");
    let m = t.m();
    let results = match guess_entries(mat.entries(), &gb) {
        Ok(res) => res,
        Err(e) => return fail(r, config_error(e)),
    };
    for (j, row) in results.iter().enumerate() {
        for (l, res) in row.iter().enumerate() {
            let label = format!("d psi'_{} / d y'_{}", j + 1, l + 1);
            r.entries
                .push(EntryReport::new(label, j + 1, l + 1, mat.entry(j, l), res));
        }
    }
    clock.lap("guess");

    if t.d() == 1 {
        if let Ok(second) = hypersurface_entries(&t, gb.series_order()) {
            if let Ok(res) = guess_entries(&second, &gb) {
                for j in 0..m {
                    for l in 0..m {
                        let label = format!("d2 phi / d y_{} d y_{} at (grad phi)^-1", j + 1, l + 1);
                        r.second_derivative_entries.push(EntryReport::new(
                            label,
                            j + 1,
                            l + 1,
                            &second[j][l],
                            &res[j][l],
                        ));
                    }
                }
            }
        }
        clock.lap("second_derivatives");
    }

    let missing = r.entries.iter().filter(|e| !e.result.is_found()).count();
    if missing == 0 {
        r.verdict = Verdict::PassesNecessaryCondition;
        r.message = format!(
            "every entry satisfies a polynomial relation of degree <= {} validated through order {}; the necessary condition holds at these bounds",
            bounds.degree,
            gb.series_order()
        );
    } else {
        r.verdict = Verdict::ObstructedUpToBounds;
        r.message = format!(
            "no polynomial relation of degree <= {} found at order {} for {} of {} entries; this is evidence against local algebraizability under the asserted hypotheses",
            bounds.degree,
            bounds.order,
            missing,
            r.entries.len()
        );
    }
    r.timings_ms = clock.finish();
    r
}

fn guess_entries(
    entries: &[Vec<Series>],
    gb: &crate::algdep::GuessBounds,
) -> Result<Vec<Vec<RelationResult>>, CrError> {
    use rayon::prelude::*;
    entries
        .par_iter()
        .map(|row| row.iter().map(|e| gb.guess(e).map_err(CrError::from)).collect())
        .collect()
}

fn run_polar(p: &ProblemFile, opts: &RunOptions) -> Report {
    let mut clock = Clock::new(opts.timings);
    let mut r = Report::empty(Command::Polar, Some(p.clone()));
    r.assumptions.family_membership_asserted |= opts.assume_family;
    let bounds = resolve_bounds(p, opts);
    r.bounds = Some(bounds);
    if p.n != 2 || p.d != 1 || p.phi.len() != 1 {
        return fail(r, "a rigid polar problem has n = 2, d = 1 and one profile");
    }
    let gb = bounds.guess();
    let phi = match phi_series(&p.phi[0], 0, 1, gb.series_order() + 1) {
        Ok(s) => s,
        Err(e) => return fail(r, e),
    };
    let profile = match PolarProfile::new(phi) {
        Ok(pp) => pp,
        Err(e) => return fail(r, e),
    };
    clock.lap("expand");
    let result = match polar_rigid_test(&profile, &gb) {
        Ok(res) => res,
        Err(e) => return fail(r, config_error(e)),
    };
    clock.lap("guess");
    let dphi = profile.phi().diff(0).expect("order >= 1");
    r.entries
        .push(EntryReport::new("d phi / d x".into(), 1, 1, &dphi, &result));
    r.minimality = if profile.levi_nondegenerate() {
        Minimality::True
    } else {
        Minimality::Unchecked
    };
    if !profile.levi_nondegenerate() {
        r.verdict = Verdict::UncheckedHypotheses;
        r.message = "profile has vanishing first derivative at 0; the Levi-nondegeneracy hypothesis fails and no verdict is drawn".into();
    } else if result.is_found() {
        r.verdict = Verdict::PassesNecessaryCondition;
        r.message = format!(
            "the derivative of the profile satisfies a polynomial relation of degree <= {} validated through order {}",
            bounds.degree,
            gb.series_order()
        );
    } else {
        r.verdict = Verdict::ObstructedUpToBounds;
        r.message = format!(
            "no polynomial relation of degree <= {} found at order {} for the derivative of the profile; this is evidence against local algebraizability under the asserted hypotheses",
            bounds.degree, bounds.order
        );
    }
    r.timings_ms = clock.finish();
    r
}

/// Witness search only.
pub fn run_nondegen(p: &ProblemFile, opts: &RunOptions) -> Report {
    let mut clock = Clock::new(opts.timings);
    let mut r = Report::empty(Command::Nondegen, Some(p.clone()));
    r.assumptions.family_membership_asserted |= opts.assume_family;
    let bounds = resolve_bounds(p, opts);
    r.bounds = Some(bounds);
    let user_len = opts
        .witness
        .as_ref()
        .or(p.witness.as_ref())
        .and_then(|w| w.betas.iter().map(|b| b.iter().sum::<u32>()).max())
        .unwrap_or(0);
    let t = match load_tube(p, bounds.max_witness_order.max(user_len) + 1) {
        Ok(t) => t,
        Err(e) => return fail(r, e),
    };
    r.minimality = minimality(&t);
    match pick_witness(&t, p, opts, bounds.max_witness_order) {
        Ok(Some((w, source))) => match witness_report(&t, &w, source) {
            Ok(wr) => {
                r.witness = Some(wr);
                r.verdict = Verdict::FinitelyNondegenerate;
                r.message = "the derivative map of the witness has full rank at 0".into();
            }
            Err(e) => return fail(r, e),
        },
        Ok(None) => {
            r.verdict = Verdict::NotFinitelyNondegenerateUpToOrder;
            r.message = format!(
                "no finite-nondegeneracy witness with multiindices of length <= {}",
                bounds.max_witness_order
            );
        }
        Err(e) => return fail(r, e),
    }
    clock.lap("witness");
    r.timings_ms = clock.finish();
    r
}

/// Relation search on a single series.
pub fn run_guess(g: &GuessFile, flags: &BoundsOverride) -> GuessReport {
    let mut out = GuessReport {
        tool: "tubecheck".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: Some(g.clone()),
        bounds: None,
        result: None,
        error: None,
    };
    if g.var_count == 0 || g.var_count > 9 {
        out.error = Some("var_count must be between 1 and 9".into());
        return out;
    }
    let bounds = Bounds::resolve(g.var_count, &flags.or(&g.bounds.unwrap_or_default()));
    out.bounds = Some(bounds);
    let gb = bounds.guess();
    let f = match phi_series(&g.series, 0, g.var_count, gb.series_order()) {
        Ok(f) => f,
        Err(e) => {
            out.error = Some(e.replacen("phi[1]", "series", 1));
            return out;
        }
    };
    match gb.guess(&f) {
        Ok(res) => out.result = Some(EntryReport::new("f".into(), 1, 1, &f, &res)),
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// The bundled problems as `(file name, problem)` pairs.
pub fn corpus() -> Vec<(String, ProblemFile)> {
    let mut out = Vec::new();
    let mut push = |file: &str, p: ProblemFile| out.push((file.to_string(), p));

    push(
        "tube_sin_square.json",
        ProblemFile::tube("v = sin(y^2)", 2, &["sin(y1^2)"]),
    );
    push(
        "tube_sinh_square.json",
        ProblemFile::tube("v = sinh(y^2)", 2, &["sinh(y1^2)"]),
    );
    push(
        "tube_exp_exp.json",
        ProblemFile::tube("v = exp(exp(y) - 1) - 1", 2, &["exp(exp(y1)-1)-1"]),
    );
    push(
        "control_square.json",
        ProblemFile::tube("control v = y^2", 2, &["y1^2"]),
    );
    // The obstruction entry of y^2 + y^6 has a relation of total degree 9.
    push(
        "control_square_sixth.json",
        ProblemFile::tube("control v = y^2 + y^6", 2, &["y1^2 + y1^6"]).with_bounds(BoundsOverride {
            degree: Some(9),
            ..Default::default()
        }),
    );
    push("control_rational.json", rational_control());

    for (file, phi) in [
        ("control2_sum_squares.json", "y1^2 + y2^2"),
        ("control2_quadratic_form.json", "y1^2 + y1*y2 + 2*y2^2"),
        ("control2_cubic.json", "y1^2 + y2^2 + y1^3"),
        ("control2_quartic.json", "y1^2 + y2^2 + y2^4"),
        ("control2_product.json", "y1*y2"),
        ("control2_coupled_cubic.json", "y1^2 + y2^2 + y1^2*y2"),
    ] {
        push(file, ProblemFile::tube(&format!("control v = {phi}"), 3, &[phi]));
    }

    let family = |chi: &[Expr]| tube_family_expr(3, chi).expect("n = 3 with two functions").to_string();
    let zero = Expr::int(0);
    push(
        "family_n3_chi_zero.json",
        ProblemFile::tube("family n = 3, chi = 0", 3, &[&family(&[zero.clone(), zero])]),
    );
    let chi = [
        parse("exp(y1)-1", 2).expect("valid"),
        parse("sin(y2)", 2).expect("valid"),
    ];
    push(
        "family_n3_chi_exp_sin.json",
        ProblemFile::tube("family n = 3, chi = (exp(y1) - 1, sin(y2))", 3, &[&family(&chi)]),
    );

    let polar_bounds = BoundsOverride {
        degree: Some(4),
        order: Some(40),
        ..Default::default()
    };
    for (file, name, phi) in [
        ("polar_exp.json", "v = exp(z zbar) - 1", "exp(y1) - 1"),
        ("polar_sin.json", "v = sin(z zbar)", "sin(y1)"),
        ("polar_sinh.json", "v = sinh(z zbar)", "sinh(y1)"),
        ("polar_control.json", "control v = z zbar + (z zbar)^2", "y1 + y1^2"),
    ] {
        push(file, ProblemFile::polar(name, phi).with_bounds(polar_bounds));
    }
    out
}

/// `y^2 / (1 - y)` as explicit Taylor data.
fn rational_control() -> ProblemFile {
    const ORDER: u32 = 80;
    let coefficients = (0..=ORDER)
        .map(|k| {
            Rat(if k >= 2 {
                BigRational::one()
            } else {
                BigRational::default()
            })
        })
        .collect();
    let mut p = ProblemFile::tube("control v = y^2 / (1 - y)", 2, &["0"]);
    p.phi = vec![PhiEntry::Series(SeriesLiteral {
        order: ORDER,
        terms: Vec::new(),
        coefficients,
    })];
    p
}

/// Write [`corpus`] into `dir`, one pretty-printed JSON file per problem.
pub fn emit_corpus(dir: &Path) -> io::Result<Vec<(PathBuf, ProblemFile)>> {
    std::fs::create_dir_all(dir)?;
    corpus()
        .into_iter()
        .map(|(file, p)| {
            let path = dir.join(file);
            let mut text = serde_json::to_string_pretty(&p).map_err(io::Error::other)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            Ok((path, p))
        })
        .collect()
}
