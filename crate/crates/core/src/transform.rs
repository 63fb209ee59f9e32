//! Greedy local moves that turn any finitely represented policy into the
//! linear policy `P_c` without increasing the Bayes risk (up to a chosen
//! truncation slack `gamma`).
//!
//! 1. Recolor every stopping cell to declare the majority outcome.
//! 2. Truncate: make the square `h, t >= n + 1` follow `P_c`.
//! 3. Fill White cells on row/column `k` beyond the channel.
//! 4. Place the hitting points `(k + c, k)` and `(k, k + c)`.
//! 5. Erase hitting points strictly inside the channel on row/column `k`.
//!
//! Steps 3 to 5 run for `k = n, n - 1, ..., 0`. Every step re-evaluates the
//! policy exactly and fails with [`Error::Postcondition`] if its guarantee does
//! not hold.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::beta_map::{beta_lower, beta_upper, choose_c, Decision};
use crate::error::{invalid, Error, Result};
use crate::evaluator::{diagonal_masses, profile_exact};
use crate::exact::{fmt_rational, int, serde_fraction, Rational};
use crate::model::{bayes_risk, Closure, Color, Hypothesis, HypothesisParams, Policy, Profile, RiskLedger};
use crate::walk::channel_time_bound;

/// Largest explicit horizon the pipeline will materialize.
pub const MAX_HORIZON: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellChange {
    pub h: usize,
    pub t: usize,
    pub old: Color,
    pub new: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub step_label: String,
    pub cells_changed: Vec<CellChange>,
    pub profile_before: Profile,
    pub profile_after: Profile,
    #[serde(with = "serde_fraction")]
    pub risk_delta: Rational,
    #[serde(with = "serde_fraction")]
    pub allowed_increase: Rational,
}

impl StepReport {
    pub fn is_identity(&self) -> bool {
        self.cells_changed.is_empty()
    }
}

/// Which triangle Steps 4 and 5 treat first at each level. The diagonal cell
/// `(k, k)` is always erased last, once both triangles match `P_c`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleOrder {
    #[default]
    UpperFirst,
    LowerFirst,
}

impl TriangleOrder {
    fn sides(self) -> [Side; 2] {
        match self {
            TriangleOrder::UpperFirst => [Side::Upper, Side::Lower],
            TriangleOrder::LowerFirst => [Side::Lower, Side::Upper],
        }
    }
}

/// Upper triangle: row `t = k`, Blue side. Lower: column `h = k`, Red side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Upper,
    Lower,
}

impl Side {
    /// Cell at distance `offset` from the diagonal along this side's line.
    fn cell(self, level: usize, offset: usize) -> (usize, usize) {
        match self {
            Side::Upper => (level + offset, level),
            Side::Lower => (level, level + offset),
        }
    }

    fn stop_color(self) -> Color {
        match self {
            Side::Upper => Color::Blue,
            Side::Lower => Color::Red,
        }
    }
}

/// A policy together with its exact profile, so consecutive moves evaluate
/// each intermediate policy only once.
struct Tracked<'a> {
    policy: Policy,
    profile: Profile,
    params: &'a HypothesisParams,
    beta: &'a Rational,
}

impl<'a> Tracked<'a> {
    fn new(policy: Policy, params: &'a HypothesisParams, beta: &'a Rational) -> Self {
        let profile = profile_exact(&policy, params);
        Self {
            policy,
            profile,
            params,
            beta,
        }
    }

    fn risk(&self) -> Rational {
        bayes_risk(&self.profile, self.beta).expect("beta validated positive")
    }

    fn recolor(&mut self, changes: &[CellChange]) -> Result<()> {
        if changes.is_empty() {
            return Ok(());
        }
        let spec: Vec<_> = changes.iter().map(|c| (c.h, c.t, c.new)).collect();
        self.policy = self.policy.with_colors(&spec)?;
        self.profile = profile_exact(&self.policy, self.params);
        Ok(())
    }

    fn replace(&mut self, policy: Policy) {
        self.profile = profile_exact(&policy, self.params);
        self.policy = policy;
    }

    fn report(&self, label: String, changes: Vec<CellChange>, before: Profile, allowed: Rational) -> StepReport {
        let risk_before = bayes_risk(&before, self.beta).expect("beta validated positive");
        StepReport {
            step_label: label,
            cells_changed: changes,
            profile_before: before,
            profile_after: self.profile.clone(),
            risk_delta: self.risk() - risk_before,
            allowed_increase: allowed,
        }
    }
}

fn postcondition(op: &'static str, detail: String) -> Error {
    Error::Postcondition { op, detail }
}

fn precondition(op: &'static str, detail: String) -> Error {
    Error::Precondition { op, detail }
}

fn check_beta(beta: &Rational) -> Result<()> {
    if *beta <= Rational::zero() {
        return Err(invalid(format!("beta must be positive, got {}", fmt_rational(beta))));
    }
    Ok(())
}

/// Whether every explicit cell with `h, t >= level` matches `P_c` and the
/// closure is `LinearTail(c)`, i.e. the policy is `P_{c, level}`.
pub fn is_truncated_linear(policy: &Policy, c: u32, level: usize) -> bool {
    let linear = Closure::LinearTail { c };
    policy.closure() == linear
        && policy
            .explicit_cells()
            .all(|(h, t, color)| h < level || t < level || color == linear.color(h, t))
}

fn require_truncated(op: &'static str, policy: &Policy, c: u32, level: usize) -> Result<()> {
    if is_truncated_linear(policy, c, level) {
        Ok(())
    } else {
        Err(precondition(op, format!("policy does not follow P_{c} on h, t >= {level}")))
    }
}

fn is_recolored(policy: &Policy) -> bool {
    policy
        .explicit_cells()
        .all(|(h, t, color)| !color.is_stop() || color == Color::majority(h, t))
}

// ---------------------------------------------------------------------------
// Step 1
// ---------------------------------------------------------------------------

/// Recolors every stopping cell to the majority declaration (Blue on and above
/// the diagonal, Red below). Hitting times are untouched and the error sum can
/// only drop.
pub fn step1_recolor_triangles(
    policy: &Policy,
    params: &HypothesisParams,
    beta: &Rational,
) -> Result<(Policy, StepReport)> {
    check_beta(beta)?;
    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let report = recolor_triangles(&mut tracked)?;
    Ok((tracked.policy, report))
}

fn recolor_triangles(tracked: &mut Tracked) -> Result<StepReport> {
    const OP: &str = "step1";
    let before = tracked.profile.clone();
    let changes: Vec<CellChange> = tracked
        .policy
        .explicit_cells()
        .filter(|&(h, t, color)| color.is_stop() && color != Color::majority(h, t))
        .map(|(h, t, old)| CellChange {
            h,
            t,
            old,
            new: Color::majority(h, t),
        })
        .collect();
    tracked.recolor(&changes)?;
    let after = &tracked.profile;
    if after.h_plus != before.h_plus || after.h_minus != before.h_minus {
        return Err(postcondition(OP, "expected toss counts changed".into()));
    }
    if after.delta_sum() > before.delta_sum() {
        return Err(postcondition(OP, "error sum increased".into()));
    }
    Ok(tracked.report(OP.to_string(), changes, before, Rational::zero()))
}

// ---------------------------------------------------------------------------
// Step 2
// ---------------------------------------------------------------------------

/// Explicit horizon used to represent `P_{c, n+1}` of `policy` exactly.
fn truncated_horizon(policy: &Policy, c: u32, n: usize) -> usize {
    let tail_c = policy.closure().threshold().unwrap_or(0);
    let width = c.max(tail_c) as usize;
    (policy.horizon() + 1).max(2 * n + 2 + 2 * width)
}

/// Max over both hypotheses of the White-path mass on diagonal `d`, allowing
/// `d` beyond the explicit region.
fn tail_probability(policy: &Policy, params: &HypothesisParams, d: usize) -> Rational {
    let expanded = policy.materialize(d);
    Hypothesis::BOTH
        .iter()
        .map(|&hyp| diagonal_masses(&expanded, params, hyp).swap_remove(d))
        .max()
        .expect("two hypotheses")
}

/// `2 p(2n + 2) (1 + beta c^2)`: how much truncating at `n + 1` may raise the
/// Bayes risk.
pub fn truncation_bound(policy: &Policy, c: u32, n: usize, beta: &Rational, params: &HypothesisParams) -> Rational {
    let p = tail_probability(policy, params, 2 * n + 2);
    int(2) * p * (Rational::one() + beta * channel_time_bound(c))
}

/// Smallest `n >= 1` with `truncation_bound <= gamma`: doubling until the bound
/// holds, then bisecting back (the tail mass is non-increasing).
pub fn truncation_level(
    policy: &Policy,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
    gamma: &Rational,
) -> Result<usize> {
    if *gamma <= Rational::zero() {
        return Err(invalid(format!("gamma must be positive, got {}", fmt_rational(gamma))));
    }
    let factor = int(2) * (Rational::one() + beta * channel_time_bound(c));
    let mut hi = 1usize;
    let level = loop {
        let d = 2 * hi + 2;
        if truncated_horizon(policy, c, hi) > MAX_HORIZON {
            return Err(precondition(
                "step2",
                format!("no truncation level below horizon {MAX_HORIZON} meets gamma"),
            ));
        }
        let expanded = policy.materialize(d);
        let masses: Vec<Vec<Rational>> = Hypothesis::BOTH
            .iter()
            .map(|&hyp| diagonal_masses(&expanded, params, hyp))
            .collect();
        let bound = |n: usize| {
            let p = (&masses[0][2 * n + 2]).max(&masses[1][2 * n + 2]).clone();
            &factor * p
        };
        if bound(hi) <= *gamma {
            let mut lo = hi / 2; // fails (or is 0)
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if bound(mid) <= *gamma {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            break hi;
        }
        hi *= 2;
    };
    Ok(level)
}

/// Replaces the square `h, t >= n + 1` by `P_c` (closure `LinearTail(c)`).
/// The Bayes risk may rise by at most `2 p(2n + 2) (1 + beta c^2)`.
pub fn step2_truncate(
    policy: &Policy,
    c: u32,
    n: usize,
    beta: &Rational,
    params: &HypothesisParams,
) -> Result<(Policy, StepReport)> {
    check_beta(beta)?;
    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let report = truncate(&mut tracked, c, n)?;
    Ok((tracked.policy, report))
}

fn truncate(tracked: &mut Tracked, c: u32, n: usize) -> Result<StepReport> {
    const OP: &str = "step2";
    if c == 0 {
        return Err(invalid("threshold c must be at least 1"));
    }
    if n == 0 {
        return Err(invalid("truncation level n must be at least 1"));
    }
    let source = tracked.policy.clone();
    let horizon = truncated_horizon(&source, c, n);
    if horizon > MAX_HORIZON {
        return Err(precondition(OP, format!("n = {n} needs horizon {horizon} > {MAX_HORIZON}")));
    }
    if !is_recolored(&source) {
        return Err(precondition(OP, "policy has minority-colored stopping cells; run step 1 first".into()));
    }
    let allowed = truncation_bound(&source, c, n, tracked.beta, tracked.params);
    let linear = Closure::LinearTail { c };
    let truncated = Policy::from_fn(horizon, linear, |h, t| {
        if h > n && t > n {
            linear.color(h, t)
        } else {
            source.color_at(h, t)
        }
    })?;
    let changes: Vec<CellChange> = truncated
        .explicit_cells()
        .filter_map(|(h, t, new)| {
            let old = source.color_at(h, t);
            (old != new).then_some(CellChange { h, t, old, new })
        })
        .collect();
    let before = tracked.profile.clone();
    tracked.replace(truncated);
    let report = tracked.report(format!("step2 n={n}"), changes, before, allowed);
    if report.risk_delta > report.allowed_increase {
        return Err(postcondition(
            OP,
            format!(
                "risk rose by {} > bound {}",
                fmt_rational(&report.risk_delta),
                fmt_rational(&report.allowed_increase)
            ),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Step 3
// ---------------------------------------------------------------------------

/// Colors White cells `(h, level)` with `h > level + c` Blue and `(level, t)`
/// with `t > level + c` Red. Requires `P_{c, level+1}`. Error probabilities are
/// unchanged and hitting times cannot grow.
pub fn step3_fill_gaps(
    policy: &Policy,
    level: usize,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
) -> Result<(Policy, StepReport)> {
    check_beta(beta)?;
    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let report = fill_gaps(&mut tracked, level, c)?;
    Ok((tracked.policy, report))
}

fn fill_gaps(tracked: &mut Tracked, level: usize, c: u32) -> Result<StepReport> {
    const OP: &str = "step3";
    require_truncated(OP, &tracked.policy, c, level + 1)?;
    let policy = &tracked.policy;
    let mut changes = Vec::new();
    for side in [Side::Upper, Side::Lower] {
        let mut offset = c as usize + 1;
        loop {
            let (h, t) = side.cell(level, offset);
            match policy.explicit(h, t) {
                None => break,
                Some(Color::White) => changes.push(CellChange {
                    h,
                    t,
                    old: Color::White,
                    new: side.stop_color(),
                }),
                Some(_) => {}
            }
            offset += 1;
        }
    }
    let before = tracked.profile.clone();
    tracked.recolor(&changes)?;
    let after = &tracked.profile;
    if after.delta_plus != before.delta_plus || after.delta_minus != before.delta_minus {
        return Err(postcondition(OP, format!("error probabilities changed at level {level}")));
    }
    if after.h_plus > before.h_plus || after.h_minus > before.h_minus {
        return Err(postcondition(OP, format!("hitting time grew at level {level}")));
    }
    Ok(tracked.report(format!("step3 k={level}"), changes, before, Rational::zero()))
}

// ---------------------------------------------------------------------------
// Step 4
// ---------------------------------------------------------------------------

/// Places Blue at `(level + c, level)` and Red at `(level, level + c)`.
/// Requires Step 3 at `level` and `beta >= l_c`.
pub fn step4_place_hitting_points(
    policy: &Policy,
    level: usize,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
) -> Result<(Policy, StepReport)> {
    step4_place_hitting_points_ordered(policy, level, c, beta, params, TriangleOrder::default())
}

pub fn step4_place_hitting_points_ordered(
    policy: &Policy,
    level: usize,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
    order: TriangleOrder,
) -> Result<(Policy, StepReport)> {
    check_beta(beta)?;
    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let report = place_hitting_points(&mut tracked, level, c, order)?;
    Ok((tracked.policy, report))
}

/// Every explicit cell on `side` at offsets `from..` must already stop with the
/// side's color.
fn require_stops_beyond(op: &'static str, policy: &Policy, side: Side, level: usize, from: usize) -> Result<()> {
    let mut offset = from;
    while let Some(color) = {
        let (h, t) = side.cell(level, offset);
        policy.explicit(h, t)
    } {
        if color != side.stop_color() {
            let (h, t) = side.cell(level, offset);
            return Err(precondition(op, format!("cell ({h}, {t}) is {color:?}, expected {:?}", side.stop_color())));
        }
        offset += 1;
    }
    Ok(())
}

fn place_hitting_points(tracked: &mut Tracked, level: usize, c: u32, order: TriangleOrder) -> Result<StepReport> {
    const OP: &str = "step4";
    require_truncated(OP, &tracked.policy, c, level + 1)?;
    let lower_bound = beta_lower(c, tracked.params)?;
    if *tracked.beta < lower_bound {
        return Err(precondition(
            OP,
            format!("beta {} < l_{c} = {}", fmt_rational(tracked.beta), fmt_rational(&lower_bound)),
        ));
    }
    for side in [Side::Upper, Side::Lower] {
        require_stops_beyond(OP, &tracked.policy, side, level, c as usize + 1)?;
    }
    let before = tracked.profile.clone();
    let mut changes = Vec::new();
    for side in order.sides() {
        let (h, t) = side.cell(level, c as usize);
        let old = tracked.policy.explicit(h, t).ok_or_else(|| {
            precondition(OP, format!("cell ({h}, {t}) lies outside the explicit region"))
        })?;
        if old == side.stop_color() {
            continue;
        }
        if old != Color::White {
            return Err(precondition(OP, format!("cell ({h}, {t}) stops with the minority color")));
        }
        let change = CellChange {
            h,
            t,
            old,
            new: side.stop_color(),
        };
        let risk_before = tracked.risk();
        tracked.recolor(&[change])?;
        if tracked.risk() > risk_before {
            return Err(postcondition(OP, format!("placing ({h}, {t}) raised the risk")));
        }
        changes.push(change);
    }
    Ok(tracked.report(format!("step4 k={level}"), changes, before, Rational::zero()))
}

// ---------------------------------------------------------------------------
// Step 5
// ---------------------------------------------------------------------------

/// Erases the stopping cells strictly inside the channel on row and column
/// `level`, one at a time and farthest from the diagonal first; the diagonal
/// cell goes last. Requires Step 4 at `level` and `beta <= u_c`. Leaves
/// `P_{c, level}`.
pub fn step5_erase_extraneous(
    policy: &Policy,
    level: usize,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
) -> Result<(Policy, StepReport)> {
    step5_erase_extraneous_ordered(policy, level, c, beta, params, TriangleOrder::default())
}

pub fn step5_erase_extraneous_ordered(
    policy: &Policy,
    level: usize,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
    order: TriangleOrder,
) -> Result<(Policy, StepReport)> {
    check_beta(beta)?;
    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let report = erase_extraneous(&mut tracked, level, c, order)?;
    Ok((tracked.policy, report))
}

/// Lemma hypothesis for erasing the cell at `offset` on `side`: the cells
/// farther out but inside the channel are White and the channel edge stops.
fn require_linear_continuation(policy: &Policy, side: Side, level: usize, offset: usize, c: u32) -> Result<()> {
    for further in offset + 1..c as usize {
        let (h, t) = side.cell(level, further);
        if policy.color_at(h, t) != Color::White {
            return Err(postcondition(
                "step5",
                format!("erasure order broken: ({h}, {t}) still stops"),
            ));
        }
    }
    require_stops_beyond("step5", policy, side, level, c as usize)
}

fn erase_extraneous(tracked: &mut Tracked, level: usize, c: u32, order: TriangleOrder) -> Result<StepReport> {
    const OP: &str = "step5";
    require_truncated(OP, &tracked.policy, c, level + 1)?;
    let upper_bound = beta_upper(c, tracked.params)?;
    if *tracked.beta > upper_bound {
        return Err(precondition(
            OP,
            format!("beta {} > u_{c} = {}", fmt_rational(tracked.beta), fmt_rational(&upper_bound)),
        ));
    }
    for side in [Side::Upper, Side::Lower] {
        require_stops_beyond(OP, &tracked.policy, side, level, c as usize)?;
    }
    let before = tracked.profile.clone();
    let mut changes = Vec::new();

    let mut erase = |tracked: &mut Tracked, side: Side, offset: usize| -> Result<()> {
        let (h, t) = side.cell(level, offset);
        let old = tracked.policy.color_at(h, t);
        if !old.is_stop() {
            return Ok(());
        }
        if old != Color::majority(h, t) {
            return Err(precondition(OP, format!("cell ({h}, {t}) stops with the minority color")));
        }
        require_linear_continuation(&tracked.policy, side, level, offset, c)?;
        if offset == 0 {
            let other = match side {
                Side::Upper => Side::Lower,
                Side::Lower => Side::Upper,
            };
            require_linear_continuation(&tracked.policy, other, level, 0, c)?;
        }
        let change = CellChange {
            h,
            t,
            old,
            new: Color::White,
        };
        let risk_before = tracked.risk();
        tracked.recolor(&[change])?;
        if tracked.risk() > risk_before {
            return Err(postcondition(OP, format!("erasing ({h}, {t}) raised the risk")));
        }
        changes.push(change);
        Ok(())
    };

    for side in order.sides() {
        for offset in (1..c as usize).rev() {
            erase(tracked, side, offset)?;
        }
    }
    erase(tracked, Side::Upper, 0)?;

    if !is_truncated_linear(&tracked.policy, c, level) {
        return Err(postcondition(OP, format!("policy is not P_{c} on h, t >= {level}")));
    }
    Ok(tracked.report(format!("step5 k={level}"), changes, before, Rational::zero()))
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linearization {
    /// Always `P_c` on success, normalized to horizon 0.
    #[serde(skip)]
    pub policy: Option<Policy>,
    pub threshold: u32,
    pub truncation_level: usize,
    pub reports: Vec<StepReport>,
    pub ledger: RiskLedger,
}

impl Linearization {
    pub fn final_policy(&self) -> &Policy {
        self.policy.as_ref().expect("set by linearize")
    }
}

/// Runs Steps 1 to 5 with `c = choose_c(beta)`. Requires `0 < beta <= eps`;
/// above `eps` the optimum is to declare without tossing.
pub fn linearize(
    policy: &Policy,
    beta: &Rational,
    params: &HypothesisParams,
    gamma: &Rational,
) -> Result<Linearization> {
    check_beta(beta)?;
    match choose_c(beta, params)? {
        Decision::Linear(c) => linearize_to(policy, c, beta, params, gamma, TriangleOrder::default()),
        Decision::DeclareImmediately => Err(precondition(
            "linearize",
            format!(
                "beta {} exceeds eps {}: declaring immediately (P_0) is optimal, nothing to linearize",
                fmt_rational(beta),
                fmt_rational(params.epsilon())
            ),
        )),
    }
}

/// Runs Steps 1 to 5 towards an explicit threshold `c`; `beta` must lie in
/// `[l_c, u_c]`.
pub fn linearize_to(
    policy: &Policy,
    c: u32,
    beta: &Rational,
    params: &HypothesisParams,
    gamma: &Rational,
    order: TriangleOrder,
) -> Result<Linearization> {
    check_beta(beta)?;
    if c == 0 {
        return Err(invalid("threshold c must be at least 1"));
    }
    let (lower, upper) = (beta_lower(c, params)?, beta_upper(c, params)?);
    if *beta < lower || *beta > upper {
        return Err(precondition(
            "linearize",
            format!(
                "beta {} lies outside [l_{c}, u_{c}] = [{}, {}]",
                fmt_rational(beta),
                fmt_rational(&lower),
                fmt_rational(&upper)
            ),
        ));
    }
    if *gamma <= Rational::zero() {
        return Err(invalid(format!("gamma must be positive, got {}", fmt_rational(gamma))));
    }

    let mut tracked = Tracked::new(policy.clone(), params, beta);
    let mut ledger = RiskLedger::new();
    let mut reports = Vec::new();
    ledger.push("input", tracked.profile.clone(), tracked.risk(), Rational::zero());

    let mut record = |report: StepReport, tracked: &Tracked, ledger: &mut RiskLedger| {
        ledger.push(
            report.step_label.clone(),
            tracked.profile.clone(),
            tracked.risk(),
            report.allowed_increase.clone(),
        );
        reports.push(report);
    };

    let report = recolor_triangles(&mut tracked)?;
    record(report, &tracked, &mut ledger);

    let n = truncation_level(&tracked.policy, c, beta, params, gamma)?;
    let report = truncate(&mut tracked, c, n)?;
    record(report, &tracked, &mut ledger);

    for level in (0..=n).rev() {
        let report = fill_gaps(&mut tracked, level, c)?;
        record(report, &tracked, &mut ledger);
        let report = place_hitting_points(&mut tracked, level, c, order)?;
        record(report, &tracked, &mut ledger);
        let report = erase_extraneous(&mut tracked, level, c, order)?;
        record(report, &tracked, &mut ledger);
    }

    ledger.check_monotone()?;
    if ledger.total_change() > *gamma {
        return Err(postcondition(
            "linearize",
            format!("total risk change {} exceeds gamma", fmt_rational(&ledger.total_change())),
        ));
    }
    let final_policy = tracked.policy.normalized();
    let target = Policy::linear(c)?;
    if final_policy != target {
        return Err(postcondition("linearize", "result differs from the linear policy".into()));
    }
    Ok(Linearization {
        policy: Some(final_policy),
        threshold: c,
        truncation_level: n,
        reports,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_map::{g_ratio, BetaInterval};
    use crate::exact::frac;
    use crate::model::linear_color;

    fn params() -> HypothesisParams {
        HypothesisParams::new(frac(1, 10)).unwrap()
    }

    #[test]
    fn step1_fixes_minority_colors() {
        let p = params();
        let policy = Policy::from_fn(5, Closure::ForcedStop, |h, t| match (h, t) {
            (3, 1) => Color::Red,
            (0, 2) => Color::Blue,
            _ if h + t < 2 => Color::White,
            (1, 1) => Color::White,
            _ => Color::majority(h, t),
        })
        .unwrap();
        let beta = frac(1, 20);
        let (fixed, report) = step1_recolor_triangles(&policy, &p, &beta).unwrap();
        assert_eq!(fixed.color_at(3, 1), Color::Blue);
        assert_eq!(fixed.color_at(0, 2), Color::Red);
        assert_eq!(report.cells_changed.len(), 2);
        assert_eq!(report.profile_before.h_plus, report.profile_after.h_plus);
        assert_eq!(report.profile_before.h_minus, report.profile_after.h_minus);
        assert!(report.profile_after.delta_sum() < report.profile_before.delta_sum());

        let (again, report) = step1_recolor_triangles(&fixed, &p, &beta).unwrap();
        assert_eq!(again, fixed);
        assert!(report.is_identity());
        assert_eq!(report.risk_delta, Rational::zero());
    }

    #[test]
    fn step2_respects_bound() {
        let p = params();
        let beta = beta_lower(2, &p).unwrap();
        let all_white = Policy::from_fn(10, Closure::ForcedStop, |_, _| Color::White).unwrap();
        let (truncated, report) = step2_truncate(&all_white, 2, 3, &beta, &p).unwrap();
        assert!(is_truncated_linear(&truncated, 2, 4));
        assert!(report.risk_delta <= report.allowed_increase);
        let expected_bound = truncation_bound(&all_white, 2, 3, &beta, &p);
        assert_eq!(report.allowed_increase, expected_bound);
    }

    #[test]
    fn step2_is_identity_on_linear_policy() {
        let p = params();
        let beta = frac(1, 20);
        let (out, report) = step2_truncate(&Policy::linear(2).unwrap(), 2, 4, &beta, &p).unwrap();
        assert!(report.is_identity());
        assert_eq!(report.risk_delta, Rational::zero());
        assert!(out.same_coloring(&Policy::linear(2).unwrap().materialize(out.horizon())));
    }

    #[test]
    fn step2_zero_tail_means_no_increase() {
        let p = params();
        let beta = frac(1, 20);
        // Everything stops by diagonal 4, so p(2n + 2) = 0 for n >= 2.
        let policy = Policy::from_fn(4, Closure::ForcedStop, |_, _| Color::White).unwrap();
        let (_, report) = step2_truncate(&policy, 1, 2, &beta, &p).unwrap();
        assert_eq!(report.allowed_increase, Rational::zero());
        assert!(report.risk_delta <= Rational::zero());
    }

    #[test]
    fn step2_rejects_unrecolored_input() {
        let p = params();
        let policy = Policy::from_fn(2, Closure::ForcedStop, |h, t| if (h, t) == (1, 0) { Color::Red } else { Color::White })
            .unwrap();
        assert!(matches!(
            step2_truncate(&policy, 1, 1, &frac(1, 20), &p),
            Err(Error::Precondition { .. })
        ));
    }

    /// `P_{c, level+1}` with arbitrary stops on row and column `level`.
    fn truncated_with(c: u32, level: usize, horizon: usize, row: impl Fn(usize, usize) -> Option<Color>) -> Policy {
        Policy::from_fn(horizon, Closure::LinearTail { c }, |h, t| {
            if h > level && t > level {
                linear_color(c, h, t)
            } else if let Some(color) = row(h, t) {
                color
            } else if (h < level || t < level) && h + t + 1 < horizon {
                Color::White
            } else {
                linear_color(c, h, t)
            }
        })
        .unwrap()
    }

    #[test]
    fn step3_fills_reachable_gap() {
        let p = params();
        let c = 2;
        let level = 1;
        // White at (level + c + 2, level) = (5, 1) with everything before it White.
        let policy = truncated_with(c, level, 12, |h, t| {
            if t == 0 {
                Some(if h >= 6 { Color::Blue } else { Color::White })
            } else if t == level && h >= level {
                Some(if h == 5 || h < level + c as usize { Color::White } else { Color::Blue })
            } else if h == level && t > level {
                Some(linear_color(c, h, t))
            } else {
                None
            }
        });
        let beta = frac(1, 20);
        let (filled, report) = step3_fill_gaps(&policy, level, c, &beta, &p).unwrap();
        assert_eq!(filled.color_at(5, 1), Color::Blue);
        assert_eq!(report.profile_before.delta_plus, report.profile_after.delta_plus);
        assert_eq!(report.profile_before.delta_minus, report.profile_after.delta_minus);
        assert!(report.profile_after.h_plus < report.profile_before.h_plus);
    }

    #[test]
    fn step3_identity_and_unreachable() {
        let p = params();
        let beta = frac(1, 20);
        let linear = Policy::linear(2).unwrap().materialize(10);
        let (out, report) = step3_fill_gaps(&linear, 2, 2, &beta, &p).unwrap();
        assert_eq!(out, linear);
        assert!(report.is_identity());

        // Origin stops, so the White gap at (6, 1) is unreachable.
        let policy = truncated_with(2, 1, 12, |h, t| match (h, t) {
            (0, 0) => Some(Color::Blue),
            (6, 1) => Some(Color::White),
            _ => None,
        });
        let (out, report) = step3_fill_gaps(&policy, 1, 2, &beta, &p).unwrap();
        assert_eq!(out.color_at(6, 1), Color::Blue);
        assert_eq!(report.profile_before, report.profile_after);
    }

    #[test]
    fn step3_rejects_non_truncated_input() {
        let p = params();
        let policy = Policy::from_fn(8, Closure::LinearTail { c: 2 }, |h, t| {
            if (h, t) == (3, 3) {
                Color::Blue
            } else {
                linear_color(2, h, t)
            }
        })
        .unwrap();
        assert!(matches!(
            step3_fill_gaps(&policy, 1, 2, &frac(1, 20), &p),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn step4_at_lower_bound_is_risk_neutral_ratio() {
        let p = params();
        for c in 1..=3u32 {
            let level = 1;
            let beta = beta_lower(c, &p).unwrap();
            // Row/column `level` match P_c except the two hitting points.
            let policy = truncated_with(c, level, 2 * level + 2 * c as usize + 4, |h, t| {
                if (h, t) == (level + c as usize, level) || (h, t) == (level, level + c as usize) {
                    Some(Color::White)
                } else {
                    None
                }
            });
            let (placed, report) = step4_place_hitting_points(&policy, level, c, &beta, &p).unwrap();
            assert_eq!(placed.color_at(level + c as usize, level), Color::Blue);
            assert_eq!(placed.color_at(level, level + c as usize), Color::Red);
            let d_delta = report.profile_after.delta_sum() - report.profile_before.delta_sum();
            let d_time = report.profile_after.time_sum() - report.profile_before.time_sum();
            assert!(d_time < Rational::zero());
            assert_eq!(d_delta / d_time, -beta.clone(), "c = {c}");
            assert_eq!(report.risk_delta, Rational::zero());
        }
    }

    #[test]
    fn step4_rejects_small_beta() {
        let p = params();
        let policy = Policy::linear(2).unwrap().materialize(10);
        let beta = beta_lower(2, &p).unwrap() / int(2);
        assert!(matches!(
            step4_place_hitting_points(&policy, 1, 2, &beta, &p),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn step4_unreachable_point_changes_nothing() {
        let p = params();
        let c = 2;
        let policy = truncated_with(c, 1, 10, |h, t| match (h, t) {
            (0, 0) => Some(Color::Blue),
            (3, 1) | (1, 3) => Some(Color::White),
            _ => None,
        });
        let beta = BetaInterval::new(c, &p).unwrap().midpoint();
        let (_, report) = step4_place_hitting_points(&policy, 1, c, &beta, &p).unwrap();
        assert_eq!(report.cells_changed.len(), 2);
        assert_eq!(report.profile_before, report.profile_after);
    }

    #[test]
    fn step5_diagonal_erasure_matches_g0() {
        let p = params();
        for c in 1..=3u32 {
            let level = 1;
            let beta = beta_upper(c, &p).unwrap();
            let policy = truncated_with(c, level, 2 * level + 2 * c as usize + 4, |h, t| {
                ((h, t) == (level, level)).then_some(Color::Blue)
            });
            let (erased, report) = step5_erase_extraneous(&policy, level, c, &beta, &p).unwrap();
            assert_eq!(report.cells_changed.len(), 1);
            assert_eq!(erased.color_at(level, level), Color::White);
            let d_delta = report.profile_after.delta_sum() - report.profile_before.delta_sum();
            let d_time = report.profile_after.time_sum() - report.profile_before.time_sum();
            assert!(d_time > Rational::zero());
            assert_eq!(d_delta / d_time, g_ratio(c, 0, &p).unwrap(), "c = {c}");
            assert!(report.risk_delta <= Rational::zero());
        }
    }

    #[test]
    fn step5_erases_far_points_first() {
        let p = params();
        let c = 3u32;
        let level = 2;
        let beta = beta_upper(c, &p).unwrap();
        let policy = truncated_with(c, level, 16, |h, t| {
            if t == level && (level..level + c as usize).contains(&h) {
                Some(Color::Blue)
            } else if h == level && (level + 1..level + c as usize).contains(&t) {
                Some(Color::Red)
            } else {
                None
            }
        });
        let (erased, report) = step5_erase_extraneous(&policy, level, c, &beta, &p).unwrap();
        let order: Vec<(usize, usize)> = report.cells_changed.iter().map(|ch| (ch.h, ch.t)).collect();
        assert_eq!(order, vec![(4, 2), (3, 2), (2, 4), (2, 3), (2, 2)]);
        assert!(is_truncated_linear(&erased, c, level));

        let (_, lower_first) = step5_erase_extraneous_ordered(&policy, level, c, &beta, &p, TriangleOrder::LowerFirst).unwrap();
        let order: Vec<(usize, usize)> = lower_first.cells_changed.iter().map(|ch| (ch.h, ch.t)).collect();
        assert_eq!(order, vec![(2, 4), (2, 3), (4, 2), (3, 2), (2, 2)]);
        assert_eq!(lower_first.profile_after, report.profile_after);
    }

    #[test]
    fn step5_rejects_large_beta() {
        let p = params();
        let policy = Policy::linear(2).unwrap().materialize(10);
        let beta = beta_upper(2, &p).unwrap() * int(2);
        assert!(matches!(
            step5_erase_extraneous(&policy, 1, 2, &beta, &p),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn linearize_fixed_point() {
        let p = params();
        for c in 1..=3 {
            let beta = BetaInterval::new(c, &p).unwrap().midpoint();
            let out = linearize(&Policy::linear(c).unwrap(), &beta, &p, &frac(1, 1_000_000)).unwrap();
            assert_eq!(out.final_policy(), &Policy::linear(c).unwrap());
            assert!(out.reports.iter().all(StepReport::is_identity));
            assert_eq!(out.ledger.total_change(), Rational::zero());
        }
    }

    #[test]
    fn linearize_p3_to_p2_strictly_improves() {
        let p = params();
        let beta = BetaInterval::new(2, &p).unwrap().midpoint();
        let out = linearize(&Policy::linear(3).unwrap(), &beta, &p, &frac(1, 1_000_000)).unwrap();
        assert_eq!(out.threshold, 2);
        assert_eq!(out.final_policy(), &Policy::linear(2).unwrap());
        assert!(out.ledger.total_change() < Rational::zero());
    }

    #[test]
    fn linearize_rejects_beta_above_epsilon() {
        let p = params();
        let err = linearize(&Policy::linear(1).unwrap(), &frac(1, 5), &p, &frac(1, 1000)).unwrap_err();
        assert!(err.to_string().contains("P_0"));
    }
}
