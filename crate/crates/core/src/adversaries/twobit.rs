//! Two-bit lower-bound instance family and its exact structural checks.
//!
//! All coordinates are integer multiples of `u = 1/(96(N-1))`, chosen so that
//! every constant of the construction is a whole number of units:
//!
//! | quantity    | units       |
//! |-------------|-------------|
//! | `l = 1/12`  | `8(N-1)`    |
//! | `ρ = 1/32`  | `3(N-1)`    |
//! | `Δ = l/(N-1)` | `8`       |
//! | `δ = Δ/2`   | `4`         |
//! | `(1-l)/2`   | `44(N-1)`   |
//! | `(1+l)/2`   | `52(N-1)`   |
//! | `1-l-ρ`     | `85(N-1)`   |
//! | `1-l`       | `88(N-1)`   |
//!
//! Masses are integer numerators over one common denominator, so sums,
//! expectations and comparisons are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FiniteValuationDistribution;
use crate::error::{Error, Result};
use crate::trade::Valuation;

/// Where the single `W5` valuation sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum W5Placement {
    /// `(0, (1+l)/2)`: the placement under which the plateau value `c1`
    /// includes `γ5 (1+l)/2` and the optimum sits at `(p_k*, p_k* + δ)`.
    Upper,
    /// `(0, (1-l)/2)`, kept to demonstrate that the checks then fail.
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoBitLbParams {
    /// Family size; must exceed 32.
    pub n: u64,
    /// Instance index: 0 is the base instance, `1..=N-2` are perturbed.
    pub k: u64,
    /// `ε / γ1` as a fraction in `(0, 1]`.
    pub eps_num: u64,
    pub eps_den: u64,
    pub w5: W5Placement,
}

impl TwoBitLbParams {
    /// Instance `k` of the size-`n` family with `ε = γ1/2`.
    pub fn new(n: u64, k: u64) -> Result<Self> {
        let p = Self {
            n,
            k,
            eps_num: 1,
            eps_den: 2,
            w5: W5Placement::Upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n <= 32 {
            return Err(Error::InvalidParameter(format!("two-bit family needs N > 32, got {}", self.n)));
        }
        if self.k > self.n - 2 {
            return Err(Error::InvalidParameter(format!(
                "instance index k must lie in 0..={}, got {}",
                self.n - 2,
                self.k
            )));
        }
        if self.eps_den == 0 || self.eps_num == 0 || self.eps_num > self.eps_den {
            return Err(Error::InvalidParameter("epsilon must lie in (0, γ1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WSet {
    W1,
    W2,
    W3,
    W4,
    W5,
    W6,
}

#[derive(Debug, Clone)]
pub struct LbPoint {
    pub set: WSet,
    pub index: usize,
    /// Coordinates in units of `1/(96(N-1))`.
    pub s: i64,
    pub b: i64,
    /// Base-instance mass numerator.
    pub mass: BigInt,
}

/// The support shared by every instance of a family, with base masses and
/// the perturbation pattern.
#[derive(Debug, Clone)]
pub struct TwoBitFamily {
    pub n: u64,
    pub w5: W5Placement,
    /// Units per 1: `96(N-1)`.
    pub unit: i64,
    /// Common mass denominator.
    pub mass_den: BigInt,
    pub gamma1: BigInt,
    pub eps: BigInt,
    pub gamma4: BigInt,
    pub gamma5: BigInt,
    pub gamma6: BigInt,
    pub points: Vec<LbPoint>,
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

impl TwoBitFamily {
    pub fn new(n: u64, eps_num: u64, eps_den: u64, w5: W5Placement) -> Result<Self> {
        TwoBitLbParams {
            n,
            k: 0,
            eps_num,
            eps_den,
            w5,
        }
        .validate()?;
        let ni = n as i64;
        let m1 = ni - 1;
        let unit = 96 * m1;
        let half_low = 44 * m1; // (1-l)/2
        let half_high = 52 * m1; // (1+l)/2
        let w1_b = 88 * m1; // 1-l
        let w2_b = 85 * m1; // 1-l-ρ

        // W3 mass_i = γ1 (85(N-1) - 16 i) / (44(N-1) - 4 + 8 i)
        let w3_num: Vec<i64> = (0..ni).map(|i| 85 * m1 - 16 * i).collect();
        let w3_den: Vec<i64> = (0..ni).map(|i| half_low - 4 + 8 * i).collect();
        let lcm = w3_den.iter().fold(BigInt::one(), |acc, d| acc.lcm(&big(*d)));

        let ed = big(eps_den as i64);
        let mass_den = big(512) * big(ni * ni) * &lcm * &ed;
        let gamma1 = big(8) * &lcm * &ed; // mass_den / (64 N²)
        let eps = big(8) * &lcm * big(eps_num as i64);
        let gamma4 = big(4) * &gamma1 * big(13 * ni - 14);
        let gamma5 = &mass_den / big(64);

        let mut points = Vec::new();
        for i in 0..ni {
            let s = half_low + 8 * i;
            points.push(LbPoint { set: WSet::W1, index: i as usize, s, b: w1_b, mass: gamma1.clone() });
            points.push(LbPoint { set: WSet::W2, index: i as usize, s, b: w2_b, mass: gamma1.clone() });
        }
        for i in 0..ni as usize {
            let mass = &gamma1 * big(w3_num[i]) * (&lcm / big(w3_den[i])) / &lcm;
            debug_assert!((&gamma1 * big(w3_num[i])) % big(w3_den[i]) == BigInt::zero());
            points.push(LbPoint { set: WSet::W3, index: i, s: 0, b: w3_den[i], mass });
        }
        for i in 0..ni {
            points.push(LbPoint {
                set: WSet::W4,
                index: i as usize,
                s: half_low + 8 * i,
                b: half_low - 4 + 8 * i,
                mass: gamma4.clone(),
            });
        }
        let w5_b = match w5 {
            W5Placement::Upper => half_high,
            W5Placement::AsWritten => half_low,
        };
        points.push(LbPoint { set: WSet::W5, index: 0, s: 0, b: w5_b, mass: gamma5.clone() });
        let used: BigInt = points.iter().map(|p| &p.mass).sum();
        let rest = &mass_den - used;
        if rest.is_negative() || (&rest % big(4)) != BigInt::zero() {
            return Err(Error::InvalidDistribution(format!(
                "corner mass {rest}/{mass_den} is not a non-negative multiple of 4"
            )));
        }
        let gamma6 = rest / big(4);
        for (i, (s, b)) in [(0, 0), (0, unit), (unit, unit), (unit, 0)].into_iter().enumerate() {
            points.push(LbPoint { set: WSet::W6, index: i, s, b, mass: gamma6.clone() });
        }
        Ok(Self {
            n,
            w5,
            unit,
            mass_den,
            gamma1,
            eps,
            gamma4,
            gamma5,
            gamma6,
            points,
        })
    }

    /// `+1`/`-1` if instance `k` moves `ε` onto/off this point, else 0.
    pub fn sign(&self, k: u64, point: &LbPoint) -> i64 {
        if k == 0 {
            return 0;
        }
        let k = k as usize;
        match (point.set, point.index) {
            (WSet::W1, i) if i == k => 1,
            (WSet::W1, i) if i == k + 1 => -1,
            (WSet::W2, i) if i == k => -1,
            (WSet::W2, i) if i == k + 1 => 1,
            _ => 0,
        }
    }

    fn perturbed(&self, k: u64) -> Vec<(&LbPoint, i64)> {
        self.points
            .iter()
            .map(|p| (p, self.sign(k, p)))
            .filter(|(_, s)| *s != 0)
            .collect()
    }

    /// Mass of `point` under instance `k`.
    pub fn mass(&self, k: u64, point: &LbPoint) -> BigInt {
        &point.mass + &self.eps * big(self.sign(k, point))
    }

    /// `p_k* = (1-l)/2 + kΔ` in units.
    pub fn p_star(&self, k: u64) -> i64 {
        44 * (self.n as i64 - 1) + 8 * k as i64
    }

    fn to_f64(&self, num: &BigInt, den: &BigInt) -> f64 {
        BigRational::new(num.clone(), den.clone()).to_f64().unwrap_or(f64::NAN)
    }

    /// Numerator of `E_k[GFT(p, q)]` over `mass_den * unit`, by direct summation.
    pub fn expected_gft(&self, k: u64, p: i64, q: i64) -> BigInt {
        self.points
            .iter()
            .filter(|w| w.s <= p && q <= w.b)
            .map(|w| self.mass(k, w) * big(w.b - w.s))
            .sum()
    }
}

/// Floating-point view of instance `k`.
pub fn twobit_lb_distribution(params: &TwoBitLbParams) -> Result<FiniteValuationDistribution> {
    params.validate()?;
    let fam = TwoBitFamily::new(params.n, params.eps_num, params.eps_den, params.w5)?;
    let unit = fam.unit as f64;
    let mut support = Vec::with_capacity(fam.points.len());
    let mut probs = Vec::with_capacity(fam.points.len());
    for p in &fam.points {
        let m = fam.mass(params.k, p);
        if m.is_negative() {
            return Err(Error::InvalidDistribution(format!("negative mass at {:?}", p.set)));
        }
        support.push(Valuation::new(p.s as f64 / unit, p.b as f64 / unit)?);
        probs.push(fam.to_f64(&m, &fam.mass_den));
    }
    FiniteValuationDistribution::new(support, probs)
}

#[derive(Debug, Clone, Serialize)]
pub struct LbCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Expected gain from trade of `(p, p + δ)` over one price band of the base
/// instance, with `p` on the lattice `p_0* + ZΔ`.
#[derive(Debug, Clone, Serialize)]
pub struct Plateau {
    pub band: &'static str,
    pub min: f64,
    pub max: f64,
    pub constant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LbStructureReport {
    pub n: u64,
    pub epsilon_over_gamma1: String,
    pub w5: W5Placement,
    pub l: f64,
    pub rho: f64,
    pub delta_step: f64,
    pub delta: f64,
    pub gamma1: f64,
    pub epsilon: f64,
    pub gamma3_total: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub c1: f64,
    pub plateaus: Vec<Plateau>,
    pub checks: Vec<LbCheck>,
}

impl LbStructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Cumulative base-instance gains over the valuation grid:
/// `table[i][j] = Σ_{s <= S[i], b >= B[j]} μ0(s, b) (b - s)`.
struct GainTable {
    sellers: Vec<i64>,
    buyers: Vec<i64>,
    table: Vec<BigInt>,
}

impl GainTable {
    fn new(fam: &TwoBitFamily) -> Self {
        let mut sellers: Vec<i64> = fam.points.iter().map(|p| p.s).collect();
        let mut buyers: Vec<i64> = fam.points.iter().map(|p| p.b).collect();
        sellers.sort_unstable();
        sellers.dedup();
        buyers.sort_unstable();
        buyers.dedup();
        let (ns, nb) = (sellers.len(), buyers.len());
        let mut table = vec![BigInt::zero(); ns * nb];
        for p in &fam.points {
            let i = sellers.binary_search(&p.s).unwrap();
            let j = buyers.binary_search(&p.b).unwrap();
            table[i * nb + j] += &p.mass * big(p.b - p.s);
        }
        for i in 0..ns {
            for j in (0..nb.saturating_sub(1)).rev() {
                let next = table[i * nb + j + 1].clone();
                table[i * nb + j] += next;
            }
            if i > 0 {
                for j in 0..nb {
                    let prev = table[(i - 1) * nb + j].clone();
                    table[i * nb + j] += prev;
                }
            }
        }
        Self { sellers, buyers, table }
    }

    fn base(&self, i: usize, j: usize) -> &BigInt {
        &self.table[i * self.buyers.len() + j]
    }
}

/// `E_k - E_0` at `(p, q)`, as a numerator.
fn correction(fam: &TwoBitFamily, pert: &[(&LbPoint, i64)], p: i64, q: i64) -> BigInt {
    let units: i64 = pert
        .iter()
        .filter(|(w, _)| w.s <= p && q <= w.b)
        .map(|(w, sign)| sign * (w.b - w.s))
        .sum();
    &fam.eps * big(units)
}

/// Exact verification of the structural lemmas for the size-`n` family with
/// `ε = γ1 · eps_num/eps_den`, across the base instance and every perturbed
/// instance `k = 1..=N-2`.
pub fn twobit_lb_structure_report(
    n: u64,
    eps_num: u64,
    eps_den: u64,
    w5: W5Placement,
) -> Result<LbStructureReport> {
    let fam = TwoBitFamily::new(n, eps_num, eps_den, w5)?;
    let m1 = n as i64 - 1;
    let unit = fam.unit;
    let den = &fam.mass_den;
    let value_den = den * big(unit);
    let as_value = |x: &BigInt| fam.to_f64(x, &value_den);
    let table = GainTable::new(&fam);
    let (sellers, buyers) = (&table.sellers, &table.buyers);
    let instances: Vec<u64> = (0..=n - 2).collect();
    let mut checks = Vec::new();

    // (a) validity
    let total: BigInt = fam.points.iter().map(|p| &p.mass).sum();
    let gamma3_total: BigInt = fam.points.iter().filter(|p| p.set == WSet::W3).map(|p| &p.mass).sum();
    let min_mass = instances
        .iter()
        .flat_map(|&k| fam.points.iter().map(move |p| (k, p)))
        .map(|(k, p)| fam.mass(k, p))
        .min()
        .unwrap();
    let w3_ok = fam
        .points
        .iter()
        .filter(|p| p.set == WSet::W3)
        .all(|p| p.mass.is_positive() && p.mass < &fam.gamma1 * big(2));
    let gamma6_ok = &fam.gamma6 * big(32) >= *den;
    let valid = total == *den && min_mass.is_positive() && w3_ok && gamma6_ok;
    checks.push(LbCheck {
        name: "distribution validity",
        passed: valid,
        detail: format!(
            "total mass exact: {}, smallest mass positive: {}, W3 masses in (0, 2γ1): {w3_ok}, γ6 = {:.6} >= 1/32: {gamma6_ok}",
            total == *den,
            min_mass.is_positive(),
            fam.to_f64(&fam.gamma6, den)
        ),
    });

    // Plateau value c1 = E0(p0, p0 + δ), and its closed form.
    let p0 = fam.p_star(0);
    let c1 = fam.expected_gft(0, p0, p0 + 4);
    let closed_c1 = &fam.gamma5 * big(52 * m1) + &fam.gamma6 * big(unit) + &fam.gamma1 * big(77 * n as i64 * m1);
    checks.push(LbCheck {
        name: "c1 closed form",
        passed: c1 == closed_c1,
        detail: format!("brute force {:.12e}, closed form {:.12e}", as_value(&c1), as_value(&closed_c1)),
    });

    let rho_eps = &fam.eps * big(3 * m1);
    let upper = |i: usize, j: usize| sellers[i] <= buyers[j];
    let idx = |xs: &[i64], x: i64| xs.binary_search(&x).ok();

    // (b) argmax over budget-balanced pairs
    let mut argmax_ok = true;
    let mut argmax_detail = String::from("all instances: unique argmax (p_k*, p_k*+δ), margin ρε");
    for &k in &instances {
        let pert = fam.perturbed(k);
        let mut best: Option<BigInt> = None;
        let mut arg: Vec<(usize, usize)> = Vec::new();
        let mut second: Option<BigInt> = None;
        for i in 0..sellers.len() {
            for j in 0..buyers.len() {
                if !upper(i, j) {
                    continue;
                }
                let v = table.base(i, j) + correction(&fam, &pert, sellers[i], buyers[j]);
                match &best {
                    Some(b) if v < *b => {
                        if second.as_ref().is_none_or(|s| v > *s) {
                            second = Some(v);
                        }
                    }
                    Some(b) if v == *b => arg.push((i, j)),
                    _ => {
                        if best.is_some() {
                            second = best.take();
                        }
                        best = Some(v);
                        arg = vec![(i, j)];
                    }
                }
            }
        }
        let best = best.unwrap();
        let ok = if k == 0 {
            best == c1
        } else {
            let ps = fam.p_star(k);
            let target = (idx(sellers, ps), idx(buyers, ps + 4));
            let unique = arg.len() == 1 && target == (Some(arg[0].0), Some(arg[0].1));
            let margin = second.as_ref().map(|s| &best - s);
            unique && best == &c1 + &rho_eps && margin.as_ref().is_some_and(|m| *m >= rho_eps)
        };
        if !ok && argmax_ok {
            argmax_ok = false;
            argmax_detail = format!(
                "instance {k}: best {:.12e} (c1 + ρε = {:.12e}), {} maximizers, first at ({}, {}) units",
                as_value(&best),
                as_value(&(&c1 + &rho_eps)),
                arg.len(),
                sellers[arg[0].0],
                buyers[arg[0].1]
            );
        }
    }
    checks.push(LbCheck {
        name: "argmax at (p_k*, p_k*+δ)",
        passed: argmax_ok,
        detail: argmax_detail,
    });

    // (c) pairs with p > q never beat c1
    let mut dom_ok = true;
    let mut worst: Option<BigInt> = None;
    for &k in &instances {
        let pert = fam.perturbed(k);
        for i in 0..sellers.len() {
            for j in 0..buyers.len() {
                if upper(i, j) {
                    continue;
                }
                let v = table.base(i, j) + correction(&fam, &pert, sellers[i], buyers[j]);
                if v > c1 {
                    dom_ok = false;
                }
                if worst.as_ref().is_none_or(|w| v > *w) {
                    worst = Some(v);
                }
            }
        }
    }
    let worst = worst.unwrap_or_default();
    checks.push(LbCheck {
        name: "deficit pairs dominated",
        passed: dom_ok,
        detail: format!(
            "largest E_k[GFT] over p > q is {:.12e}, c1 = {:.12e}",
            as_value(&worst),
            as_value(&c1)
        ),
    });

    // (d) buyer prices above (1+l)/2 cost at least γ5/3
    let band: Vec<i64> = sellers.iter().copied().filter(|&p| p >= 44 * m1 && p < 52 * m1).collect();
    let high_q: Vec<i64> = buyers.iter().copied().filter(|&q| q > 52 * m1).collect();
    let need = &fam.gamma5 * big(unit);
    let mut explore_ok = true;
    let mut smallest: Option<BigInt> = None;
    for &k in &instances {
        let pert = fam.perturbed(k);
        let at = |p: i64, q: i64| {
            let (i, j) = (idx(sellers, p).unwrap(), idx(buyers, q).unwrap());
            table.base(i, j) + correction(&fam, &pert, p, q)
        };
        for &p in &band {
            let diag = at(p, p + 4);
            for &q in &high_q {
                let gap = (&diag - at(p, q)) * big(3);
                if gap < need {
                    explore_ok = false;
                }
                if smallest.as_ref().is_none_or(|s| gap < *s) {
                    smallest = Some(gap);
                }
            }
        }
    }
    let smallest = smallest.unwrap_or_default();
    checks.push(LbCheck {
        name: "exploration costs γ5/3",
        passed: explore_ok,
        detail: format!(
            "smallest 3·(E[GFT(p,p+δ)] - E[GFT(p,q)]) = {:.12e}, γ5 = {:.12e}",
            as_value(&smallest),
            fam.to_f64(&fam.gamma5, den)
        ),
    });

    // (e) two-bit feedback is instance-independent outside the strips
    // [p_k*, p_{k+1}*) × (1-l-ρ, 1-l]. Prices are doubled so that midpoints
    // between grid values are integers too.
    let extended = |xs: &[i64]| -> Vec<i64> {
        let mut out: Vec<i64> = xs.iter().map(|x| 2 * x).collect();
        out.extend(xs.windows(2).map(|w| w[0] + w[1]));
        out.push(0);
        out.push(2 * unit);
        out.sort_unstable();
        out.dedup();
        out
    };
    let ps2 = extended(sellers);
    let qs2 = extended(buyers);
    let in_strip = |p2: i64, q2: i64| {
        q2 > 2 * 85 * m1
            && q2 <= 2 * 88 * m1
            && (1..=n as i64 - 2).any(|k| p2 >= 2 * (44 * m1 + 8 * k) && p2 < 2 * (44 * m1 + 8 * (k + 1)))
    };
    let mut outside_ok = true;
    let mut outside_checked = 0usize;
    let mut inside_differs = 0usize;
    for &k in instances.iter().filter(|&&k| k > 0) {
        let pert = fam.perturbed(k);
        for &p2 in &ps2 {
            for &q2 in &qs2 {
                let mut delta = [0i64; 4];
                for (w, sign) in &pert {
                    let z = usize::from(2 * w.s <= p2) * 2 + usize::from(q2 <= 2 * w.b);
                    delta[z] += sign;
                }
                let differs = delta.iter().any(|d| *d != 0);
                if in_strip(p2, q2) {
                    inside_differs += usize::from(differs);
                } else {
                    outside_checked += 1;
                    if differs {
                        outside_ok = false;
                    }
                }
            }
        }
    }
    checks.push(LbCheck {
        name: "feedback independent of instance",
        passed: outside_ok,
        detail: format!(
            "{outside_checked} (instance, pair) cases outside the strips agree with the base; {inside_differs} inside differ"
        ),
    });

    // Plateaus of E0[GFT(p, p + δ)] on the Δ-lattice through p_0*, banded by
    // where the buyer price p + δ falls.
    let lattice: Vec<i64> = {
        let first = p0 % 8;
        (0..).map(|j| first + 8 * j).take_while(|&p| p + 4 <= unit).collect()
    };
    let bands: [(&'static str, i64, i64); 4] = [
        ("p + δ <= (1+l)/2", i64::MIN, 52 * m1),
        ("(1+l)/2 < p + δ <= 1-l-ρ", 52 * m1, 85 * m1),
        ("1-l-ρ < p + δ <= 1-l", 85 * m1, 88 * m1),
        ("p + δ > 1-l", 88 * m1, i64::MAX),
    ];
    let plateaus = bands
        .iter()
        .map(|&(band, lo, hi)| {
            let vals: Vec<BigInt> = lattice
                .iter()
                .filter(|&&p| p + 4 > lo && p + 4 <= hi)
                .map(|&p| fam.expected_gft(0, p, p + 4))
                .collect();
            let min = vals.iter().min().cloned().unwrap_or_default();
            let max = vals.iter().max().cloned().unwrap_or_default();
            Plateau {
                band,
                min: as_value(&min),
                max: as_value(&max),
                constant: min == max,
            }
        })
        .collect();

    let f = |x: &BigInt| fam.to_f64(x, den);
    Ok(LbStructureReport {
        n,
        epsilon_over_gamma1: format!("{eps_num}/{eps_den}"),
        w5,
        l: 1.0 / 12.0,
        rho: 1.0 / 32.0,
        delta_step: 8.0 / unit as f64,
        delta: 4.0 / unit as f64,
        gamma1: f(&fam.gamma1),
        epsilon: f(&fam.eps),
        gamma3_total: f(&gamma3_total),
        gamma4: f(&fam.gamma4),
        gamma5: f(&fam.gamma5),
        gamma6: f(&fam.gamma6),
        c1: as_value(&c1),
        plateaus,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_masses_equal_gamma1() {
        let fam = TwoBitFamily::new(64, 1, 2, W5Placement::Upper).unwrap();
        let g1 = BigRational::new(fam.gamma1.clone(), fam.mass_den.clone());
        assert_eq!(g1, BigRational::new(1.into(), 262_144.into()));
        for p in fam.points.iter().filter(|p| matches!(p.set, WSet::W1 | WSet::W2)) {
            assert_eq!(fam.mass(0, p), fam.gamma1);
        }
    }

    #[test]
    fn perturbation_pattern() {
        let fam = TwoBitFamily::new(64, 1, 2, W5Placement::Upper).unwrap();
        let find = |set, i| fam.points.iter().find(|p| p.set == set && p.index == i).unwrap();
        let plus = &fam.gamma1 + &fam.eps;
        let minus = &fam.gamma1 - &fam.eps;
        assert_eq!(fam.mass(3, find(WSet::W1, 3)), plus);
        assert_eq!(fam.mass(3, find(WSet::W1, 4)), minus);
        assert_eq!(fam.mass(3, find(WSet::W2, 3)), minus);
        assert_eq!(fam.mass(3, find(WSet::W2, 4)), plus);
        assert_eq!(fam.mass(3, find(WSet::W1, 5)), fam.gamma1);
    }

    #[test]
    fn gamma6_floor_and_w3_range() {
        for n in 33..=256u64 {
            let fam = TwoBitFamily::new(n, 1, 2, W5Placement::Upper).unwrap();
            assert!(&fam.gamma6 * big(32) >= fam.mass_den, "N={n}");
            for p in fam.points.iter().filter(|p| p.set == WSet::W3) {
                assert!(p.mass.is_positive() && p.mass < &fam.gamma1 * big(2), "N={n}");
            }
            let total: BigInt = fam.points.iter().map(|p| &p.mass).sum();
            assert_eq!(total, fam.mass_den);
        }
    }

    #[test]
    fn float_distribution_is_valid() {
        for k in [0, 1, 62] {
            let d = twobit_lb_distribution(&TwoBitLbParams::new(64, k).unwrap()).unwrap();
            assert_eq!(d.support().len(), 4 * 64 + 5);
        }
        assert!(TwoBitLbParams::new(64, 63).is_err());
        assert!(TwoBitLbParams::new(32, 1).is_err());
    }

    #[test]
    fn structure_holds_for_n33() {
        let r = twobit_lb_structure_report(33, 1, 2, W5Placement::Upper).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(r.plateaus.iter().all(|p| p.constant), "{:?}", r.plateaus);
        assert_eq!(r.plateaus[0].max, r.c1);
    }

    #[test]
    fn literal_w5_placement_breaks_the_argmax() {
        let r = twobit_lb_structure_report(33, 1, 2, W5Placement::AsWritten).unwrap();
        assert!(!r.passed());
    }
}
