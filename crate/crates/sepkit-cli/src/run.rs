//! Command dispatch: one instance in, one report out.
//!
//! Each command resolves its inputs from the instance (flags override the
//! file's `[search]` table), runs the corresponding toolkit entry point,
//! re-states every numeric conclusion as a residual-table row, and maps the
//! result onto the three outcomes: `verified` (exit 0), `none_found`
//! (exit 1: the input is fine but the property is absent or no witness
//! surfaced within the budget), and `error` (exit 2).

use anyhow::{anyhow, bail, Result};

use sepkit::norms::{
    check_monotone, check_triangle, estimate_kappa, eval_norm, prod_eval, verify_relations,
    Compatibility, ProductNormSpec,
};
use sepkit::sample::Sampler;
use sepkit::separation::{
    check_premise, separate_local_with, separate_shifted_with, separate_with, special_summary,
    specialize_with, verify_certificate, Profile, SepError, SepOptions, SeparationInstance,
};
use sepkit::tol::Tols;
use sepkit::varcheck::{
    check_alpha_stationary, check_alpha_transversal, check_extremal, check_stationary,
    convex_equivalence_suite, dual_stationarity_certificate, extended_ep_suite,
    transversality_constant, ScheduleReport, TransversalCheck, VarError, VarOptions,
};
use sepkit::Vector;

use crate::report::{Outcome, Report};
use crate::schema::{CombineNode, LoadedInstance};

/// The eight commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    NormsCheck,
    Separate,
    SeparateLocal,
    SeparateShifted,
    Specialize,
    Stationarity,
    Transversality,
    EquivalenceSuite,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::NormsCheck => "norms-check",
            Command::Separate => "separate",
            Command::SeparateLocal => "separate-local",
            Command::SeparateShifted => "separate-shifted",
            Command::Specialize => "specialize",
            Command::Stationarity => "stationarity",
            Command::Transversality => "transversality",
            Command::EquivalenceSuite => "equivalence-suite",
        }
    }

    fn default_budget(self) -> usize {
        match self {
            Command::Stationarity | Command::Transversality | Command::EquivalenceSuite => 256,
            _ => 160,
        }
    }
}

/// Flag-level options; `None` defers to the instance file, then defaults.
#[derive(Clone, Debug, Default)]
pub struct RunOpts {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol_scale: f64,
    pub profile: Option<String>,
}

/// Resolved per-run context.
struct Ctx {
    seed: u64,
    budget: usize,
    tols: Tols,
}

impl Ctx {
    fn sep_opts(&self) -> SepOptions {
        SepOptions { seed: self.seed, budget: self.budget, tols: self.tols.clone() }
    }

    fn var_opts(&self) -> VarOptions {
        VarOptions { seed: self.seed, budget: self.budget, tols: self.tols.clone() }
    }
}

/// Runs one command on one loaded instance. Never panics on bad input:
/// everything lands in the report's outcome, notes, and warnings.
pub fn execute(command: Command, inst: &LoadedInstance, opts: &RunOpts) -> Report {
    let tol_scale = if opts.tol_scale > 0.0 { opts.tol_scale } else { 1.0 };
    let ctx = Ctx {
        seed: opts.seed.or(inst.seed()).unwrap_or(17),
        budget: opts.budget.or(inst.budget()).unwrap_or(command.default_budget()),
        tols: Tols::scaled(tol_scale),
    };
    let mut report = Report::new(
        command.label(),
        &inst.name,
        &inst.digest,
        ctx.seed,
        ctx.budget,
        tol_scale,
    );
    let run = match command {
        Command::NormsCheck => norms_check(inst, &ctx, &mut report),
        Command::Separate => cmd_separate(inst, &ctx, &mut report),
        Command::SeparateLocal => cmd_local(inst, &ctx, &mut report, false),
        Command::SeparateShifted => cmd_local(inst, &ctx, &mut report, true),
        Command::Specialize => cmd_specialize(inst, opts, &ctx, &mut report),
        Command::Stationarity => cmd_stationarity(inst, &ctx, &mut report),
        Command::Transversality => cmd_transversality(inst, &ctx, &mut report),
        Command::EquivalenceSuite => cmd_equivalence(inst, &ctx, &mut report),
    };
    report.outcome = match run {
        Ok(outcome) => outcome,
        Err(err) => {
            report.warn(format!("{err:#}"));
            Outcome::Error
        }
    };
    report
}

/// Errors that mean "the property is absent or unreachable", not "the
/// run is broken".
fn absent_sep(err: &SepError) -> bool {
    matches!(
        err,
        SepError::SetsIntersect
            | SepError::PremiseViolated { .. }
            | SepError::NoBranchApplies
            | SepError::DecompositionFailed { .. }
    )
}

// ---------------------------------------------------------------------------
// norms-check
// ---------------------------------------------------------------------------

fn norms_check(inst: &LoadedInstance, ctx: &Ctx, rep: &mut Report) -> Result<Outcome> {
    let n = match inst.raw.blocks {
        Some(b) => b,
        None if inst.sets.len() >= 2 => inst.sets.len(),
        None => bail!("norms-check needs `blocks = n` or at least two sets"),
    };
    let d = inst.dimension;
    let node =
        inst.raw.norm.as_ref().ok_or_else(|| anyhow!("norms-check needs a [norm] table"))?;
    rep.count("blocks", n as u64);

    // An explicit vector-norm combiner is checked for monotonicity first;
    // without it the composition is not a product norm in the usable sense
    // and the counterexamples are the result.
    if let CombineNode::Composed { vec_norm } = &node.combine {
        let spec = crate::schema::to_base(vec_norm, "norm.combine.vec_norm")?;
        let mut sampler = Sampler::new(ctx.seed ^ 0x636f_6d70_6f73_6564);
        let mono = check_monotone(&spec, n, &mut sampler);
        if !mono.monotone {
            let (dominated, dominating) =
                mono.witness.ok_or_else(|| anyhow!("monotonicity report lost its witness"))?;
            let hi = eval_norm(&spec, &dominated)?;
            let lo = eval_norm(&spec, &dominating)?;
            rep.push_check("combiner_monotone", hi, lo, false, false);
            rep.value("monotone_value_dominated", hi);
            rep.value("monotone_value_dominating", lo);
            rep.point("monotone_dominated", &dominated);
            rep.point("monotone_dominating", &dominating);
            rep.note(
                "the combiner is not monotone: a componentwise-dominated tuple \
                 receives the larger value",
            );
            let prod = inst.product_norm(n, ctx.seed)?;
            let mut tri_sampler = Sampler::new(ctx.seed ^ 0x7472_6961_6e67);
            if let Some((u, v)) = check_triangle(&prod, d, &mut tri_sampler) {
                let nu = prod_eval(&prod, &u)?;
                let nv = prod_eval(&prod, &v)?;
                let sum: Vec<Vector> = u.iter().zip(&v).map(|(a, b)| a.add(b)).collect();
                let joint = prod_eval(&prod, &sum)?;
                rep.push_check("combiner_triangle", joint, nu + nv, false, false);
                rep.value("triangle_joint", joint);
                rep.value("triangle_left", nu);
                rep.value("triangle_right", nv);
                rep.tuple("triangle_u", &u);
                rep.tuple("triangle_v", &v);
                rep.note("the composition even fails the triangle inequality");
            }
            return Ok(Outcome::NoneFound);
        }
        rep.note("composed combiner certified monotone by the sampled check");
    }

    let conditions: Vec<Compatibility> = match inst.params().conditions {
        Some(labels) => labels.iter().map(|l| parse_condition(l)).collect::<Result<_>>()?,
        None => {
            let mut all = vec![Compatibility::C3, Compatibility::C4, Compatibility::C5,
                Compatibility::C6];
            if inst.raw.norm_plus.is_some() {
                all.insert(0, Compatibility::C2);
                all.insert(0, Compatibility::C1);
            }
            all
        }
    };

    let norm_n = inst.product_norm(n, ctx.seed)?;
    let kappa_budget = ctx.budget.max(64) * 10;
    let mut reports = Vec::new();
    for cond in conditions {
        let cr = if matches!(cond, Compatibility::C1 | Compatibility::C2) {
            if n < 2 {
                bail!("C1/C2 need at least two blocks");
            }
            let plus = inst.product_norm_plus(n, ctx.seed)?;
            let inner = inst.product_norm(n - 1, ctx.seed)?;
            estimate_kappa(cond, &plus, Some(&inner), d, kappa_budget, ctx.seed)?
        } else {
            estimate_kappa(cond, &norm_n, None, d, kappa_budget, ctx.seed)?
        };
        let label = condition_label(cond);
        rep.value(&format!("kappa_{label}"), cr.kappa_hat);
        rep.count(&format!("kappa_{label}_budget"), cr.budget_used as u64);
        if let Some(analytic) = cr.analytic {
            rep.value(&format!("kappa_{label}_analytic"), analytic);
            rep.push_check(
                &format!("kappa_{label}_matches_analytic"),
                (cr.kappa_hat - analytic).abs(),
                1e-6,
                false,
                (cr.kappa_hat - analytic).abs() <= 1e-6,
            );
        } else {
            rep.note(format!(
                "{label}: no closed form for this family; kappa is the best sampled ratio"
            ));
        }
        reports.push(cr);
    }

    for rel in verify_relations(&reports) {
        rep.push_check(&rel.relation, rel.measured, rel.bound, false, rel.holds);
    }

    Ok(if rep.all_checks_ok() { Outcome::Verified } else { Outcome::NoneFound })
}

fn parse_condition(label: &str) -> Result<Compatibility> {
    Ok(match label {
        "C1" => Compatibility::C1,
        "C2" => Compatibility::C2,
        "C3" => Compatibility::C3,
        "C4" => Compatibility::C4,
        "C5" => Compatibility::C5,
        "C6" => Compatibility::C6,
        other => bail!("unknown compatibility condition {other:?}"),
    })
}

fn condition_label(cond: Compatibility) -> &'static str {
    match cond {
        Compatibility::C1 => "C1",
        Compatibility::C2 => "C2",
        Compatibility::C3 => "C3",
        Compatibility::C4 => "C4",
        Compatibility::C5 => "C5",
        Compatibility::C6 => "C6",
    }
}

// ---------------------------------------------------------------------------
// separate / specialize
// ---------------------------------------------------------------------------

fn build_separation_instance(
    inst: &LoadedInstance,
    ctx: &Ctx,
    rep: &mut Report,
) -> Result<SeparationInstance> {
    let n = inst.sets.len();
    if n < 2 {
        bail!("separation needs at least two sets, found {n}");
    }
    let omega = inst
        .omega
        .clone()
        .ok_or_else(|| anyhow!("this command needs a starting tuple `omega`"))?;
    let norm = inst.product_norm(n - 1, ctx.seed)?;
    let norm_plus = if inst.raw.norm_plus.is_some() {
        inst.product_norm_plus(n, ctx.seed)?
    } else {
        rep.note("no [norm_plus] given; defaulting to the max combiner over all blocks");
        ProductNormSpec::max(n, norm.base.clone())
    };
    let eps = inst.require("eps")?;
    let delta = inst.require("delta")?;
    let tau = match inst.params().tau {
        Some(t) => t,
        None => {
            rep.note("no params.tau given; defaulting to 1/2");
            0.5
        }
    };
    Ok(SeparationInstance { sets: inst.sets.clone(), omega, norm, norm_plus, eps, delta, tau })
}

fn cmd_separate(inst: &LoadedInstance, ctx: &Ctx, rep: &mut Report) -> Result<Outcome> {
    let sinst = build_separation_instance(inst, ctx, rep)?;
    let premise = check_premise(&sinst)?;
    rep.value("premise_f_omega", premise.f_omega);
    rep.value("premise_infimum", premise.infimum);
    rep.value("premise_gap", premise.gap);
    rep.push_check("premise_gap", premise.gap, sinst.eps, true, premise.holds);
    if !premise.holds {
        rep.note(
            "the starting tuple is not within eps of the best tuple value; \
             the premise fails and there is nothing to certify",
        );
        return Ok(Outcome::NoneFound);
    }

    let cert = match separate_with(&sinst, &ctx.sep_opts()) {
        Ok(c) => c,
        Err(e) if absent_sep(&e) => {
            rep.note(format!("{e}"));
            return Ok(Outcome::NoneFound);
        }
        Err(e) => return Err(e.into()),
    };

    let verify = verify_certificate(&cert, &sinst, &ctx.tols)?;
    rep.push_items("", &verify.checks);
    for w in &verify.warnings {
        rep.warn(w.clone());
    }
    rep.value("r_sum", cert.r_sum);
    rep.value("r_unit", cert.r_unit);
    rep.value("r_cone", cert.r_cone);
    rep.value("cone_gap", cert.cone_gap);
    rep.value("eps_prime", cert.eps_prime);
    rep.value("alignment", cert.alignment);
    rep.value("alignment_rhs", cert.alignment_rhs);
    rep.value("decomposition_residual", cert.decomposition_residual);
    if let Some(xi) = cert.xi {
        rep.value("xi", xi);
    }
    if let Some(k1) = cert.kappa1 {
        rep.value("kappa1", k1);
    }
    if let Some(branch) = &cert.branch {
        rep.note(format!("union branch used: {branch:?}"));
    }
    for w in &cert.warnings {
        rep.warn(w.clone());
    }
    rep.tuple("x", &cert.x);
    rep.tuple("x_star", &cert.x_star);
    rep.tuple("witness", &cert.witness);

    if verify.ok {
        Ok(Outcome::Verified)
    } else {
        rep.warn("the certificate failed its independent re-verification".to_string());
        Ok(Outcome::Error)
    }
}

fn cmd_specialize(
    inst: &LoadedInstance,
    opts: &RunOpts,
    ctx: &Ctx,
    rep: &mut Report,
) -> Result<Outcome> {
    let sinst = build_separation_instance(inst, ctx, rep)?;
    let label = opts
        .profile
        .clone()
        .or(inst.params().profile)
        .ok_or_else(|| anyhow!("specialize needs --profile or params.profile"))?;
    let profile = Profile::from_label(&label)
        .ok_or_else(|| anyhow!("unknown profile {label:?} (use EP, unified, eta_delta, or p_weighted)"))?;
    rep.note(format!("profile: {}", profile.label()));

    let special = match specialize_with(&sinst, profile, &ctx.sep_opts()) {
        Ok(s) => s,
        Err(e) if absent_sep(&e) => {
            rep.note(format!("{e}"));
            return Ok(Outcome::NoneFound);
        }
        Err(e) => return Err(e.into()),
    };

    // The residual table is profile-independent for the max-combiner
    // profiles: the same instance and seed produce the same bytes no
    // matter how the run is labeled. That is what makes the split-radius
    // reading with equal radii collapse onto the plain one.
    match profile {
        Profile::Unified | Profile::EtaDelta | Profile::ExtremalPrinciple => {
            let rows = special_summary(&sinst, &special.cert, &ctx.tols)?;
            rep.push_items("", &rows);
        }
        Profile::PWeighted => {
            rep.push_items("", &special.checks);
        }
    }
    // The profile-specific readings stay visible as named values.
    for item in &special.checks {
        rep.value(&format!("{}_observed", item.key), item.observed);
        rep.value(&format!("{}_bound", item.key), item.bound);
    }
    for n in &special.notes {
        rep.note(n.clone());
    }
    let cert = &special.cert;
    rep.value("r_sum", cert.r_sum);
    rep.value("r_unit", cert.r_unit);
    rep.value("r_cone", cert.r_cone);
    rep.value("eps_prime", cert.eps_prime);
    rep.value("alignment", cert.alignment);
    rep.value("alignment_rhs", cert.alignment_rhs);
    rep.tuple("x", &cert.x);
    rep.tuple("x_star", &cert.x_star);

    Ok(if special.ok && rep.all_checks_ok() { Outcome::Verified } else { Outcome::NoneFound })
}

// ---------------------------------------------------------------------------
// separate-local / separate-shifted
// ---------------------------------------------------------------------------

fn cmd_local(
    inst: &LoadedInstance,
    ctx: &Ctx,
    rep: &mut Report,
    shifted: bool,
) -> Result<Outcome> {
    let n = inst.sets.len();
    if n < 2 {
        bail!("separation needs at least two sets, found {n}");
    }
    let norm = inst.product_norm(n, ctx.seed)?;
    let eps = inst.require("eps")?;
    let delta = inst.require("delta")?;
    let rho = inst.require("rho")?;
    let tau = match inst.params().tau {
        Some(t) => t,
        None => {
            rep.note("no params.tau given; defaulting to 1/2");
            0.5
        }
    };
    let opts = ctx.sep_opts();

    let result = if shifted {
        let omega = inst
            .omega
            .clone()
            .ok_or_else(|| anyhow!("separate-shifted needs a starting tuple `omega`"))?;
        let shifts = inst
            .shifts
            .clone()
            .ok_or_else(|| anyhow!("separate-shifted needs per-set `shifts`"))?;
        separate_shifted_with(&inst.sets, &omega, &shifts, rho, eps, delta, tau, &norm, &opts)
    } else {
        let x_bar = inst
            .x_bar
            .clone()
            .ok_or_else(|| anyhow!("separate-local needs a reference point `x_bar`"))?;
        separate_local_with(
            &inst.sets,
            &x_bar,
            inst.omega.as_deref(),
            rho,
            eps,
            delta,
            tau,
            &norm,
            &opts,
        )
    };
    let cert = match result {
        Ok(c) => c,
        Err(e) if absent_sep(&e) => {
            rep.note(format!("{e}"));
            return Ok(Outcome::NoneFound);
        }
        Err(e) => return Err(e.into()),
    };

    let tols = &ctx.tols;
    rep.push_check(
        "mixed_residual",
        cert.mixed_residual,
        eps,
        true,
        cert.mixed_residual <= eps - tols.margin,
    );
    rep.push_check(
        "dual_unit",
        (cert.unit_full - 1.0).abs(),
        tols.residual,
        false,
        (cert.unit_full - 1.0).abs() <= tols.residual,
    );
    let align_gap = tau * cert.alignment_rhs - cert.alignment;
    rep.push_check("alignment_tau", align_gap, 0.0, true, align_gap < 0.0);
    rep.value("rho_used", cert.rho_used);
    rep.value("cone_distance_n", cert.cone_distance_n);
    rep.value("sum_norm", cert.sum_norm);
    rep.value("unit_full", cert.unit_full);
    rep.value("alignment", cert.alignment);
    rep.value("alignment_rhs", cert.alignment_rhs);
    rep.tuple("x", &cert.x);
    rep.point("x0", &cert.x0);
    rep.tuple("x_star", &cert.x_star);
    for w in &cert.warnings {
        rep.warn(w.clone());
    }

    Ok(if rep.all_checks_ok() { Outcome::Verified } else { Outcome::NoneFound })
}

// ---------------------------------------------------------------------------
// stationarity
// ---------------------------------------------------------------------------

fn schedule_rows(rep: &mut Report, prefix: &str, sr: &ScheduleReport) {
    let found = sr.witnesses.iter().filter(|w| w.is_some()).count();
    let missing = sr.schedule.len().saturating_sub(found);
    rep.push_check(
        &format!("{prefix}_all_scales"),
        missing as f64,
        0.0,
        false,
        sr.all_hold,
    );
    rep.count(&format!("{prefix}_witnesses"), found as u64);
    rep.count(&format!("{prefix}_lp_calls"), sr.lp_calls as u64);
    if sr.exhausted {
        rep.warn(format!(
            "{prefix}: the emptiness-solve cap was reached; absent witnesses are \
             budget-qualified, not conclusive"
        ));
    }
    for n in &sr.notes {
        rep.note(format!("{prefix}: {n}"));
    }
}

fn cmd_stationarity(inst: &LoadedInstance, ctx: &Ctx, rep: &mut Report) -> Result<Outcome> {
    let n = inst.sets.len();
    if n < 2 {
        bail!("stationarity needs at least two sets, found {n}");
    }
    let x_bar = inst
        .x_bar
        .clone()
        .ok_or_else(|| anyhow!("stationarity needs a reference point `x_bar`"))?;
    let norm = inst.product_norm(n, ctx.seed)?;
    let vopts = ctx.var_opts();
    let p = inst.params();

    let rho = p.rho.unwrap_or(f64::INFINITY);
    let ext = check_extremal(&inst.sets, &x_bar, rho, &norm, &vopts)?;
    schedule_rows(rep, "extremal", &ext);
    let sta = check_stationary(&inst.sets, &x_bar, &norm, &vopts)?;
    schedule_rows(rep, "stationary", &sta);

    let mut requested = Vec::new();
    if let Some(alpha) = p.alpha {
        let eps = inst.require("eps")?;
        rep.value("alpha", alpha);
        rep.value("eps", eps);
        match check_alpha_stationary(&inst.sets, &x_bar, &norm, alpha, eps, &vopts)? {
            Some(w) => {
                rep.push_check(
                    "witness_closeness",
                    w.closeness,
                    w.eps,
                    true,
                    w.closeness < w.eps,
                );
                rep.push_check(
                    "witness_shift",
                    w.shift_size,
                    w.shift_bound,
                    true,
                    w.shift_size < w.shift_bound,
                );
                rep.value("witness_rho", w.rho);
                rep.tuple("witness_points", &w.points);
                rep.tuple("witness_shifts", &w.shifts);
                requested.push(true);
            }
            None => {
                rep.note(format!(
                    "no witness at rate alpha = {alpha} within the search budget \
                     (deterministic schedule plus {} random directions, emptiness \
                     solves capped)",
                    ctx.budget
                ));
                requested.push(false);
            }
        }

        if let (Some(beta), Some(tau)) = (p.beta, p.tau) {
            let eps = inst.require("eps")?;
            match dual_stationarity_certificate(
                &inst.sets, &x_bar, &norm, alpha, beta, eps, tau, &vopts,
            ) {
                Ok(cert) => {
                    rep.push_items("dual_", &cert.checks);
                    rep.value("dual_xi", cert.xi);
                    rep.value("dual_kappa6", cert.kappa6);
                    rep.value("dual_rho", cert.rho);
                    rep.value("dual_eps_prime", cert.eps_prime);
                    rep.value("dual_delta", cert.delta);
                    rep.value("dual_closeness", cert.closeness);
                    rep.value("dual_sum_norm", cert.sum_norm);
                    rep.value("dual_unit_error", cert.unit_error);
                    rep.value("dual_cone_residual", cert.cone_residual);
                    rep.tuple("dual_x", &cert.x);
                    rep.tuple("dual_x_star", &cert.x_star);
                    for w in &cert.warnings {
                        rep.warn(w.clone());
                    }
                    requested.push(cert.ok);
                }
                Err(VarError::NoWitness(msg)) => {
                    rep.note(format!("dual certificate: {msg}"));
                    requested.push(false);
                }
                Err(VarError::NoMargin(msg)) => {
                    rep.note(format!("dual certificate: {msg}"));
                    requested.push(false);
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    let outcome = if requested.is_empty() {
        if ext.all_hold && sta.all_hold {
            Outcome::Verified
        } else {
            rep.note("some probed scale produced no verified witness");
            Outcome::NoneFound
        }
    } else if requested.iter().all(|&ok| ok) {
        Outcome::Verified
    } else {
        Outcome::NoneFound
    };
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// transversality
// ---------------------------------------------------------------------------

fn cmd_transversality(inst: &LoadedInstance, ctx: &Ctx, rep: &mut Report) -> Result<Outcome> {
    let n = inst.sets.len();
    if n < 2 {
        bail!("transversality needs at least two sets, found {n}");
    }
    let x_bar = inst
        .x_bar
        .clone()
        .ok_or_else(|| anyhow!("transversality needs a reference point `x_bar`"))?;
    let norm = inst.product_norm(n, ctx.seed)?;
    let eps = inst.require("eps")?;
    let vopts = ctx.var_opts();

    let tr = transversality_constant(&inst.sets, &x_bar, &norm, eps, &vopts)?;
    rep.value("alpha_hat", tr.alpha_hat);
    rep.count("face_tuples", tr.face_tuples as u64);
    rep.count("sphere_facets", tr.sphere_facets as u64);
    rep.count("constant_lp_calls", tr.lp_calls as u64);
    if let Some(x_star) = &tr.x_star {
        rep.tuple("attainer_x_star", x_star);
    }
    if let Some(points) = &tr.points {
        rep.tuple("attainer_points", points);
    }
    for note in &tr.notes {
        rep.note(note.clone());
    }

    let Some(alpha) = inst.params().alpha else {
        rep.note("no params.alpha given: reporting the exact constant only");
        return Ok(Outcome::Verified);
    };
    rep.value("alpha", alpha);
    match check_alpha_transversal(&inst.sets, &x_bar, &norm, alpha, eps, &vopts)? {
        TransversalCheck::ConfirmedUpToBudget { lp_calls, exhausted } => {
            rep.count("scan_lp_calls", lp_calls as u64);
            rep.push_check("transversal_at_alpha", 0.0, 0.0, false, true);
            if exhausted {
                rep.warn(
                    "the adversarial scan hit its solve cap; confirmation is \
                     qualified by the budget"
                        .to_string(),
                );
            } else if alpha > tr.alpha_hat {
                rep.warn(format!(
                    "scan found no counterexample although alpha = {alpha} exceeds \
                     the exact constant {}; the scan grid missed the refuting face",
                    tr.alpha_hat
                ));
            }
            Ok(Outcome::Verified)
        }
        TransversalCheck::Counterexample(w) => {
            rep.push_check("transversal_at_alpha", 1.0, 0.0, false, false);
            rep.push_check("witness_shift", w.shift_size, w.shift_bound, true, true);
            rep.value("witness_rho", w.rho);
            rep.value("witness_closeness", w.closeness);
            rep.tuple("witness_points", &w.points);
            rep.tuple("witness_shifts", &w.shifts);
            rep.note(format!(
                "a verified perturbation at rate alpha = {alpha} empties the \
                 intersection: transversality fails at this rate"
            ));
            if alpha < tr.alpha_hat {
                rep.warn(format!(
                    "counterexample found below the computed constant {}; \
                     the two disagree",
                    tr.alpha_hat
                ));
            }
            Ok(Outcome::NoneFound)
        }
    }
}

// ---------------------------------------------------------------------------
// equivalence-suite
// ---------------------------------------------------------------------------

fn cmd_equivalence(inst: &LoadedInstance, ctx: &Ctx, rep: &mut Report) -> Result<Outcome> {
    let n = inst.sets.len();
    if n < 2 {
        bail!("equivalence-suite needs at least two sets, found {n}");
    }
    let x_bar = inst
        .x_bar
        .clone()
        .ok_or_else(|| anyhow!("equivalence-suite needs a reference point `x_bar`"))?;
    let norm = inst.product_norm(n, ctx.seed)?;
    let vopts = ctx.var_opts();

    let mut ran = 0usize;
    let mut all_agree = true;

    match convex_equivalence_suite(&inst.sets, &x_bar, &norm, &vopts) {
        Ok(t) => {
            ran += 1;
            rep.push_check(
                "convex_four_way_agree",
                if t.agree { 0.0 } else { 1.0 },
                0.0,
                false,
                t.agree,
            );
            rep.count("convex_extremal", t.extremal as u64);
            rep.count("convex_stationary", t.stationary as u64);
            rep.count("convex_approx_stationary", t.approx_stationary as u64);
            rep.count("convex_global_perturbation", t.global_perturbation as u64);
            rep.count("convex_lp_calls", t.lp_calls as u64);
            for note in &t.notes {
                rep.note(format!("convex: {note}"));
            }
            all_agree &= t.agree;
        }
        Err(VarError::Unsupported(msg)) => {
            rep.note(format!("convex suite skipped: {msg}"));
        }
        Err(e) => return Err(e.into()),
    }

    match extended_ep_suite(&inst.sets, &x_bar, &norm, &vopts) {
        Ok(t) => {
            ran += 1;
            rep.push_check(
                "ep_three_way_agree",
                if t.agree { 0.0 } else { 1.0 },
                0.0,
                false,
                t.agree,
            );
            rep.count("ep_approx_stationary", t.approx_stationary as u64);
            rep.count("ep_dual_full", t.dual_full as u64);
            rep.count("ep_dual_simplified", t.dual_simplified as u64);
            rep.value("kappa4", t.kappa4);
            for note in &t.notes {
                rep.note(format!("ep: {note}"));
            }
            all_agree &= t.agree;
        }
        Err(VarError::Uncertified(msg)) => {
            rep.note(format!("ep suite skipped: {msg}"));
        }
        Err(e) => return Err(e.into()),
    }

    if ran == 0 {
        rep.note("neither suite applies to this instance");
        return Ok(Outcome::NoneFound);
    }
    Ok(if all_agree { Outcome::Verified } else { Outcome::NoneFound })
}
