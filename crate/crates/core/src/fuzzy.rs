//! Interval type-2 Gaussian fuzzy sets and the TSK rule base.
//!
//! Each input slot of a window is fuzzified against `M` interval Gaussian
//! sets sharing a center spacing of three point standard deviations. Rules
//! fire by the product of their antecedent memberships; the product is
//! accumulated as a sum of exponents so small memberships do not underflow
//! before rules are ranked.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::VarianceInterval;
use crate::series::Window;

/// Number of sets per input slot used by the three-sigma construction.
pub const DEFAULT_SETS_PER_INPUT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianIT2Set {
    pub center: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
}

impl GaussianIT2Set {
    pub fn new(center: f64, sigma_low: f64, sigma_high: f64) -> Result<Self> {
        if !(sigma_low > 0.0 && sigma_low <= sigma_high) {
            return Err(Error::invalid(format!(
                "need 0 < sigma_low <= sigma_high, got ({sigma_low}, {sigma_high})"
            )));
        }
        Ok(Self {
            center,
            sigma_low,
            sigma_high,
        })
    }

    /// Exponents of the (lower, upper) membership at `x`.
    fn log_membership(&self, x: f64) -> (f64, f64) {
        let d2 = (x - self.center) * (x - self.center);
        (
            -d2 / (2.0 * self.sigma_low * self.sigma_low),
            -d2 / (2.0 * self.sigma_high * self.sigma_high),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMembership {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringInterval {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyOutputInterval {
    pub low: f64,
    pub high: f64,
}

pub fn membership(set: &GaussianIT2Set, x: f64) -> IntervalMembership {
    let (lo, hi) = set.log_membership(x);
    IntervalMembership {
        low: lo.exp(),
        high: hi.exp(),
    }
}

/// Builds `m` sets centered on `center +/- 3 sigma_point`, evenly spaced, all
/// sharing the standard deviations `sqrt(lower)` and `sqrt(upper)`, both
/// floored at `sigma_floor`. Zero point variance collapses every center.
pub fn build_sets(
    center: f64,
    variance: &VarianceInterval,
    m: usize,
    sigma_floor: f64,
) -> Vec<GaussianIT2Set> {
    let sd = |v: f64| v.max(0.0).sqrt().max(sigma_floor);
    let sigma_low = sd(variance.lower);
    let sigma_high = sd(variance.upper).max(sigma_low);
    let sigma_mid = variance.point.max(0.0).sqrt();
    (0..m)
        .map(|k| {
            let offset = if m == 1 {
                0.0
            } else {
                3.0 * sigma_mid * (2.0 * k as f64 / (m - 1) as f64 - 1.0)
            };
            GaussianIT2Set {
                center: center + offset,
                sigma_low,
                sigma_high,
            }
        })
        .collect()
}

/// Membership exponents for every (window slot, set) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipGrid {
    sets: usize,
    /// `(ln low, ln high)` laid out slot-major.
    logs: Vec<(f64, f64)>,
}

impl MembershipGrid {
    pub fn evaluate(window: &Window, sets: &[GaussianIT2Set]) -> Self {
        let logs = window
            .as_slice()
            .iter()
            .flat_map(|&x| sets.iter().map(move |s| s.log_membership(x)))
            .collect();
        Self {
            sets: sets.len(),
            logs,
        }
    }

    /// Builds a grid from explicit membership values, `rows[slot][set]`.
    pub fn from_memberships(rows: &[Vec<IntervalMembership>]) -> Result<Self> {
        let sets = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != sets) {
            return Err(Error::invalid("membership grid rows differ in length"));
        }
        let logs = rows
            .iter()
            .flatten()
            .map(|m| (m.low.ln(), m.high.ln()))
            .collect();
        Ok(Self { sets, logs })
    }

    pub fn slots(&self) -> usize {
        self.logs.len().checked_div(self.sets).unwrap_or(0)
    }

    pub fn sets(&self) -> usize {
        self.sets
    }

    pub fn get(&self, slot: usize, set: usize) -> IntervalMembership {
        let (lo, hi) = self.logs[slot * self.sets + set];
        IntervalMembership {
            low: lo.exp(),
            high: hi.exp(),
        }
    }

    fn log_firing(&self, antecedent: &[usize]) -> (f64, f64) {
        antecedent
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(lo, hi), (slot, &set)| {
                let (l, h) = self.logs[slot * self.sets + set];
                (lo + l, hi + h)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub antecedent: Vec<usize>,
    /// `a0` followed by one coefficient per window slot, oldest first.
    pub coeffs: Vec<f64>,
}

impl FuzzyRule {
    pub fn new(antecedent: Vec<usize>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != antecedent.len() + 1 {
            return Err(Error::invalid(format!(
                "rule with {} antecedents needs {} coefficients, got {}",
                antecedent.len(),
                antecedent.len() + 1,
                coeffs.len()
            )));
        }
        Ok(Self { antecedent, coeffs })
    }
}

/// Product firing strength of `rule` over `grid`.
pub fn firing_strength(rule: &FuzzyRule, grid: &MembershipGrid) -> FiringInterval {
    let (lo, hi) = grid.log_firing(&rule.antecedent);
    FiringInterval {
        low: lo.exp(),
        high: hi.exp(),
    }
}

/// `a0 + sum_j a_j * x_j`.
pub fn consequent_eval(rule: &FuzzyRule, window: &Window) -> f64 {
    rule.coeffs[0]
        + rule.coeffs[1..]
            .iter()
            .zip(window.as_slice())
            .map(|(a, x)| a * x)
            .sum::<f64>()
}

/// Per slot, the set with the largest upper membership; ties go to the lowest
/// index.
pub fn classify_antecedent(window: &Window, sets: &[GaussianIT2Set]) -> Vec<usize> {
    window
        .as_slice()
        .iter()
        .map(|&x| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (i, s) in sets.iter().enumerate() {
                let (_, hi) = s.log_membership(x);
                if hi > best_val {
                    best = i;
                    best_val = hi;
                }
            }
            best
        })
        .collect()
}

/// Rules unique by antecedent, in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleBaseDoc", into = "RuleBaseDoc")]
pub struct RuleBase {
    window: usize,
    sets_per_input: usize,
    rules: Vec<FuzzyRule>,
    index: HashMap<Vec<usize>, usize>,
}

#[derive(Serialize, Deserialize)]
struct RuleBaseDoc {
    window: usize,
    set_mode: String,
    sets_per_input: usize,
    rules: Vec<FuzzyRule>,
}

const SET_MODE: &str = "three-sigma";

impl From<RuleBase> for RuleBaseDoc {
    fn from(rb: RuleBase) -> Self {
        Self {
            window: rb.window,
            set_mode: SET_MODE.to_string(),
            sets_per_input: rb.sets_per_input,
            rules: rb.rules,
        }
    }
}

impl TryFrom<RuleBaseDoc> for RuleBase {
    type Error = Error;

    fn try_from(doc: RuleBaseDoc) -> Result<Self> {
        if doc.set_mode != SET_MODE {
            return Err(Error::invalid(format!("unknown set mode {:?}", doc.set_mode)));
        }
        let mut rb = RuleBase::new(doc.window, doc.sets_per_input);
        for rule in doc.rules {
            let FuzzyRule { antecedent, coeffs } = rule;
            if !rb.retain_rule(antecedent, coeffs)? {
                return Err(Error::invalid("duplicate antecedent in rule base"));
            }
        }
        Ok(rb)
    }
}

impl RuleBase {
    pub fn new(window: usize, sets_per_input: usize) -> Self {
        Self {
            window,
            sets_per_input,
            rules: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn sets_per_input(&self) -> usize {
        self.sets_per_input
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn contains(&self, antecedent: &[usize]) -> bool {
        self.index.contains_key(antecedent)
    }

    /// Inserts a rule for `antecedent` unless one already exists. Returns
    /// whether a rule was added; an existing rule keeps its coefficients.
    pub fn retain_rule(&mut self, antecedent: Vec<usize>, initial_coeffs: Vec<f64>) -> Result<bool> {
        if antecedent.len() != self.window {
            return Err(Error::invalid(format!(
                "antecedent length {} does not match window {}",
                antecedent.len(),
                self.window
            )));
        }
        if antecedent.iter().any(|&s| s >= self.sets_per_input) {
            return Err(Error::invalid("antecedent set index out of range"));
        }
        if self.index.contains_key(&antecedent) {
            return Ok(false);
        }
        let rule = FuzzyRule::new(antecedent.clone(), initial_coeffs)?;
        self.index.insert(antecedent, self.rules.len());
        self.rules.push(rule);
        Ok(true)
    }

    /// Total number of consequent coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.rules.len() * (self.window + 1)
    }

    /// Consequent coefficients of all rules, concatenated in rule order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.rules.iter().flat_map(|r| r.coeffs.iter().copied()).collect()
    }

    pub fn set_coefficients(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.coefficient_count() {
            return Err(Error::LengthMismatch {
                left: flat.len(),
                right: self.coefficient_count(),
            });
        }
        for (rule, chunk) in self.rules.iter_mut().zip(flat.chunks(self.window + 1)) {
            rule.coeffs.copy_from_slice(chunk);
        }
        Ok(())
    }

    /// Picks the rule with the largest upper firing and the rule with the
    /// largest lower firing. Earlier rules win ties.
    pub fn select_rules(&self, grid: &MembershipGrid) -> Result<RuleSelection> {
        if self.rules.is_empty() {
            return Err(Error::EmptyRuleBase);
        }
        let mut upper = (0, f64::NEG_INFINITY);
        let mut lower = (0, f64::NEG_INFINITY);
        for (i, rule) in self.rules.iter().enumerate() {
            let (lo, hi) = grid.log_firing(&rule.antecedent);
            if hi > upper.1 {
                upper = (i, hi);
            }
            if lo > lower.1 {
                lower = (i, lo);
            }
        }
        Ok(RuleSelection {
            upper_rule: upper.0,
            upper_firing: upper.1.exp(),
            lower_rule: lower.0,
            lower_firing: lower.1.exp(),
        })
    }

    pub fn rule(&self, i: usize) -> &FuzzyRule {
        &self.rules[i]
    }
}

/// Outcome of max-firing rule selection: indices into the rule base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSelection {
    pub upper_rule: usize,
    pub upper_firing: f64,
    pub lower_rule: usize,
    pub lower_firing: f64,
}

impl RuleSelection {
    pub fn all_zero(&self) -> bool {
        self.upper_firing == 0.0 && self.lower_firing == 0.0
    }
}

/// Scales each selected rule's consequent by its firing and orders the pair.
pub fn fuzzy_output(
    upper_rule: &FuzzyRule,
    upper_firing: f64,
    lower_rule: &FuzzyRule,
    lower_firing: f64,
    window: &Window,
) -> FuzzyOutputInterval {
    let a = consequent_eval(upper_rule, window) * upper_firing;
    let b = consequent_eval(lower_rule, window) * lower_firing;
    FuzzyOutputInterval {
        low: a.min(b),
        high: a.max(b),
    }
}

/// Interval midpoint.
pub fn defuzzify(interval: &FuzzyOutputInterval) -> f64 {
    let mid = 0.5 * (interval.low + interval.high);
    mid.clamp(interval.low, interval.high)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn set(c: f64, lo: f64, hi: f64) -> GaussianIT2Set {
        GaussianIT2Set::new(c, lo, hi).unwrap()
    }

    fn im(low: f64, high: f64) -> IntervalMembership {
        IntervalMembership { low, high }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership(&set(2.0, 0.5, 1.0), 2.0), im(1.0, 1.0));
        let m = membership(&set(0.0, 1.5, 1.5), 1.5);
        assert_relative_eq!(m.high, (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(m.low, 0.606_530_659_712_633, epsilon = 1e-12);
        let m = membership(&set(0.0, 0.5, 1.0), 3.0);
        assert_relative_eq!(m.high, 0.011_108_996_538_242, epsilon = 1e-12);
        assert_relative_eq!(m.low, 1.522_997_974_471_263e-8, max_relative = 1e-12);
        assert!(m.low <= m.high);
    }

    #[test]
    fn set_rejects_bad_sigmas() {
        assert!(GaussianIT2Set::new(0.0, 0.0, 1.0).is_err());
        assert!(GaussianIT2Set::new(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn build_sets_examples() {
        let s = build_sets(5.0, &VarianceInterval::constant(1.0), 3, 1e-8);
        assert_eq!(s.iter().map(|s| s.center).collect::<Vec<_>>(), vec![2.0, 5.0, 8.0]);
        assert!(s.iter().all(|s| s.sigma_low == 1.0 && s.sigma_high == 1.0));

        let v = VarianceInterval {
            lower: 0.25,
            point: 1.0,
            upper: 4.0,
        };
        let s = build_sets(0.0, &v, 3, 1e-8);
        assert_eq!(s.iter().map(|s| s.center).collect::<Vec<_>>(), vec![-3.0, 0.0, 3.0]);
        assert!(s.iter().all(|s| s.sigma_low == 0.5 && s.sigma_high == 2.0));

        let s = build_sets(1.5, &VarianceInterval::constant(0.0), 3, 1e-8);
        assert!(s.iter().all(|s| s.center == 1.5 && s.sigma_low == 1e-8 && s.sigma_high == 1e-8));
    }

    #[test]
    fn build_sets_general_m() {
        let s = build_sets(0.0, &VarianceInterval::constant(1.0), 5, 1e-8);
        let centers: Vec<f64> = s.iter().map(|s| s.center).collect();
        assert_eq!(centers, vec![-3.0, -1.5, 0.0, 1.5, 3.0]);
        assert_eq!(build_sets(4.0, &VarianceInterval::constant(1.0), 1, 1e-8)[0].center, 4.0);
    }

    fn grid(rows: &[&[(f64, f64)]]) -> MembershipGrid {
        let rows: Vec<Vec<IntervalMembership>> = rows
            .iter()
            .map(|r| r.iter().map(|&(l, h)| im(l, h)).collect())
            .collect();
        MembershipGrid::from_memberships(&rows).unwrap()
    }

    #[test]
    fn firing_examples() {
        let rule = FuzzyRule::new(vec![1, 1], vec![0.0; 3]).unwrap();
        let g = grid(&[&[(0.1, 0.2), (1.0, 1.0), (0.3, 0.3)], &[(0.0, 0.1), (1.0, 1.0), (0.2, 0.4)]]);
        assert_eq!(firing_strength(&rule, &g), FiringInterval { low: 1.0, high: 1.0 });

        let g = grid(&[&[(0.9, 0.9), (0.5, 0.5), (0.9, 0.9)], &[(0.9, 0.9), (0.5, 0.5), (0.9, 0.9)]]);
        let f = firing_strength(&rule, &g);
        assert_relative_eq!(f.low, 0.25, epsilon = 1e-15);
        assert_relative_eq!(f.high, 0.25, epsilon = 1e-15);

        let g = grid(&[&[(1.0, 1.0), (0.0, 0.0), (1.0, 1.0)], &[(1.0, 1.0), (0.7, 0.8), (1.0, 1.0)]]);
        assert_eq!(firing_strength(&rule, &g), FiringInterval { low: 0.0, high: 0.0 });
    }

    #[test]
    fn consequent_examples() {
        let w = Window::new(vec![4.0, -2.0]);
        assert_eq!(consequent_eval(&FuzzyRule::new(vec![0, 0], vec![0.0; 3]).unwrap(), &w), 0.0);
        let r = FuzzyRule::new(vec![0], vec![1.0, 2.0]).unwrap();
        assert_eq!(consequent_eval(&r, &Window::new(vec![3.0])), 7.0);
        let r = FuzzyRule::new(vec![0, 0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(consequent_eval(&r, &w), 4.0);
    }

    #[test]
    fn classify_examples() {
        let sets = build_sets(0.0, &VarianceInterval::constant(1.0), 3, 1e-8);
        assert_eq!(classify_antecedent(&Window::new(vec![0.0]), &sets), vec![1]);
        // halfway between -3 and 0
        assert_eq!(classify_antecedent(&Window::new(vec![-1.5]), &sets), vec![0]);
        assert_eq!(classify_antecedent(&Window::new(vec![3.0; 4]), &sets), vec![2; 4]);
    }

    #[test]
    fn retain_examples() {
        let mut rb = RuleBase::new(2, 3);
        assert!(rb.retain_rule(vec![1, 1], vec![0.0; 3]).unwrap());
        assert_eq!(rb.len(), 1);
        assert!(!rb.retain_rule(vec![1, 1], vec![9.0; 3]).unwrap());
        assert_eq!(rb.len(), 1);
        assert_eq!(rb.rule(0).coeffs, vec![0.0; 3]);
        assert!(rb.retain_rule(vec![0, 2], vec![0.0; 3]).unwrap());
        assert_eq!(rb.len(), 2);
        assert!(rb.retain_rule(vec![0], vec![0.0; 2]).is_err());
        assert!(rb.retain_rule(vec![0, 3], vec![0.0; 3]).is_err());
    }

    #[test]
    fn select_examples() {
        let mut rb = RuleBase::new(1, 3);
        assert!(matches!(rb.select_rules(&grid(&[&[(1.0, 1.0); 3]])), Err(Error::EmptyRuleBase)));

        rb.retain_rule(vec![0], vec![0.0, 1.0]).unwrap();
        let g = grid(&[&[(0.3, 0.9), (0.2, 0.4), (0.0, 0.0)]]);
        let sel = rb.select_rules(&g).unwrap();
        assert_eq!((sel.upper_rule, sel.lower_rule), (0, 0));
        assert_relative_eq!(sel.upper_firing, 0.9, epsilon = 1e-15);
        assert_relative_eq!(sel.lower_firing, 0.3, epsilon = 1e-15);

        rb.retain_rule(vec![1], vec![0.0, 1.0]).unwrap();
        let sel = rb.select_rules(&g).unwrap();
        assert_eq!(sel.upper_rule, 0);

        rb.retain_rule(vec![2], vec![0.0, 1.0]).unwrap();
        let zero = grid(&[&[(0.0, 0.0); 3]]);
        let sel = rb.select_rules(&zero).unwrap();
        assert_eq!((sel.upper_rule, sel.lower_rule), (0, 0));
        assert!(sel.all_zero());
    }

    #[test]
    fn fuzzy_output_examples() {
        let w = Window::new(vec![1.0]);
        let r = FuzzyRule::new(vec![0], vec![0.0, 3.0]).unwrap();
        let out = fuzzy_output(&r, 0.5, &r, 0.5, &w);
        assert_eq!(out, FuzzyOutputInterval { low: 1.5, high: 1.5 });

        let l = FuzzyRule::new(vec![0], vec![2.0, 0.0]).unwrap();
        let rr = FuzzyRule::new(vec![1], vec![1.0, 0.0]).unwrap();
        let out = fuzzy_output(&l, 0.5, &rr, 0.8, &w);
        assert_relative_eq!(out.low, 0.8);
        assert_relative_eq!(out.high, 1.0);

        let out = fuzzy_output(&l, 0.0, &rr, 0.0, &w);
        assert_eq!(out, FuzzyOutputInterval { low: 0.0, high: 0.0 });
    }

    #[test]
    fn defuzzify_examples() {
        assert_eq!(defuzzify(&FuzzyOutputInterval { low: 0.2, high: 0.8 }), 0.5);
        assert_eq!(defuzzify(&FuzzyOutputInterval { low: 0.3, high: 0.3 }), 0.3);
        assert_eq!(defuzzify(&FuzzyOutputInterval { low: -1.0, high: 1.0 }), 0.0);
    }

    #[test]
    fn rulebase_json_round_trip() {
        let mut rb = RuleBase::new(2, 3);
        rb.retain_rule(vec![1, 1], vec![0.1, 0.5, 0.5]).unwrap();
        rb.retain_rule(vec![0, 2], vec![-0.3, 1.0 / 3.0, 2.0]).unwrap();
        let json = serde_json::to_string(&rb).unwrap();
        assert!(json.contains("\"set_mode\":\"three-sigma\""));
        let back: RuleBase = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rb);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn rulebase_json_rejects_duplicates() {
        let doc = r#"{"window":1,"set_mode":"three-sigma","sets_per_input":3,
            "rules":[{"antecedent":[0],"coeffs":[0,1]},{"antecedent":[0],"coeffs":[1,1]}]}"#;
        assert!(serde_json::from_str::<RuleBase>(doc).is_err());
    }

    proptest! {
        #[test]
        fn membership_monotone_in_sigma(x in -10f64..10.0, c in -10f64..10.0, s1 in 0.01f64..5.0, ds in 0.001f64..5.0) {
            prop_assume!((x - c).abs() > 1e-3);
            let narrow = membership(&set(c, s1, s1), x).high;
            let wide = membership(&set(c, s1 + ds, s1 + ds), x).high;
            prop_assert!(narrow < wide || (narrow == 0.0 && wide == 0.0) || wide == 1.0);
            let m = membership(&set(c, s1, s1 + ds), x);
            prop_assert!(0.0 <= m.low && m.low <= m.high && m.high < 1.0);
        }

        #[test]
        fn firing_in_unit_square(xs in prop::collection::vec(-5f64..5.0, 1..8),
                                 ant_seed in prop::collection::vec(0usize..3, 8),
                                 lo in 0.01f64..2.0, extra in 0f64..2.0, c in -1f64..1.0) {
            let w = Window::new(xs.clone());
            let v = VarianceInterval { lower: lo * lo, point: lo * lo, upper: (lo + extra).powi(2) };
            let sets = build_sets(c, &v, 3, 1e-8);
            let g = MembershipGrid::evaluate(&w, &sets);
            let rule = FuzzyRule::new(ant_seed[..xs.len()].to_vec(), vec![0.0; xs.len() + 1]).unwrap();
            let f = firing_strength(&rule, &g);
            prop_assert!(0.0 <= f.low && f.low <= f.high && f.high <= 1.0);
        }

        #[test]
        fn log_product_matches_naive(ms in prop::collection::vec((1e-6f64..1.0, 0f64..1.0), 1..=8)) {
            let rows: Vec<Vec<IntervalMembership>> = ms
                .iter()
                .map(|&(l, t)| vec![im(l, l + t * (1.0 - l))])
                .collect();
            let g = MembershipGrid::from_memberships(&rows).unwrap();
            let rule = FuzzyRule::new(vec![0; ms.len()], vec![0.0; ms.len() + 1]).unwrap();
            let f = firing_strength(&rule, &g);
            let naive_lo: f64 = rows.iter().map(|r| r[0].low).product();
            let naive_hi: f64 = rows.iter().map(|r| r[0].high).product();
            prop_assert!((f.low - naive_lo).abs() <= 1e-12 * naive_lo);
            prop_assert!((f.high - naive_hi).abs() <= 1e-12 * naive_hi);
        }

        #[test]
        fn defuzzify_inside(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let iv = FuzzyOutputInterval { low: a.min(b), high: a.max(b) };
            let m = defuzzify(&iv);
            prop_assert!(iv.low <= m && m <= iv.high);
        }

        #[test]
        fn classify_translation_invariant(xs in prop::collection::vec(-64i32..64, 1..6), c in -16i32..16, shift in -1000i32..1000) {
            let to_w = |d: f64| Window::new(xs.iter().map(|&x| x as f64 / 8.0 + d).collect());
            let sets_at = |d: f64| build_sets(c as f64 / 8.0 + d, &VarianceInterval::constant(1.0), 3, 1e-8);
            let d = shift as f64;
            prop_assert_eq!(
                classify_antecedent(&to_w(0.0), &sets_at(0.0)),
                classify_antecedent(&to_w(d), &sets_at(d))
            );
        }
    }
}
