//! Payoff model of repeated bilateral trade: valuations, posted prices,
//! gain from trade, revenue, the budget ledger and the three feedback
//! channels.
//!
//! All comparisons in the trade indicator are inclusive: a seller with
//! valuation `s` accepts any price `p >= s`, a buyer with valuation `b`
//! accepts any price `q <= b`.

use serde::Serialize;

use crate::error::{Error, Result};

fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfUnitRange { what, value })
    }
}

/// Private valuations of one seller/buyer couple. `seller > buyer` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Valuation {
    pub seller: f64,
    pub buyer: f64,
}

impl Valuation {
    pub fn new(seller: f64, buyer: f64) -> Result<Self> {
        Ok(Self {
            seller: check_unit("seller valuation", seller)?,
            buyer: check_unit("buyer valuation", buyer)?,
        })
    }

    /// Welfare change `b - s` if this couple trades.
    pub fn gap(&self) -> f64 {
        self.buyer - self.seller
    }
}

/// Prices posted in one round: `seller` is paid to the seller, `buyer` is
/// charged to the buyer.
///
/// The spread `buyer - seller` is stored alongside the prices. Pairs built
/// from integer numerators keep the correctly rounded spread of the exact
/// rational pair, so that grid invariants such as "every adjacent pair runs a
/// deficit of exactly 1/K" hold bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PricePair {
    seller: f64,
    buyer: f64,
    #[serde(skip)]
    spread: f64,
}

impl PricePair {
    pub fn new(seller: f64, buyer: f64) -> Result<Self> {
        check_unit("seller price", seller)?;
        check_unit("buyer price", buyer)?;
        Ok(Self::raw(seller, buyer))
    }

    /// The same price posted to both agents.
    pub fn single(price: f64) -> Result<Self> {
        Self::new(price, price)
    }

    /// Pair `(seller_num / den, buyer_num / den)`.
    ///
    /// Panics if `den == 0` or a numerator exceeds `den`.
    pub fn from_ratio(seller_num: u64, buyer_num: u64, den: u64) -> Self {
        assert!(den > 0 && seller_num <= den && buyer_num <= den);
        let d = den as f64;
        let spread = (buyer_num as i128 - seller_num as i128) as f64 / d;
        Self {
            seller: seller_num as f64 / d,
            buyer: buyer_num as f64 / d,
            spread,
        }
    }

    pub(crate) fn raw(seller: f64, buyer: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&seller) && (0.0..=1.0).contains(&buyer));
        Self {
            seller,
            buyer,
            spread: buyer - seller,
        }
    }

    pub fn seller(&self) -> f64 {
        self.seller
    }

    pub fn buyer(&self) -> f64 {
        self.buyer
    }

    /// `q - p`: the revenue collected whenever this pair trades.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    /// `p - q`: the budget this pair may consume in a single round.
    pub fn deficit(&self) -> f64 {
        -self.spread
    }
}

/// `1{s <= p} * 1{q <= b}`.
#[inline]
pub fn trades(pair: &PricePair, v: &Valuation) -> bool {
    v.seller <= pair.seller && pair.buyer <= v.buyer
}

/// Gain from trade `1{s <= p} 1{q <= b} (b - s)`.
#[inline]
pub fn gft(pair: &PricePair, v: &Valuation) -> f64 {
    if trades(pair, v) {
        v.gap()
    } else {
        0.0
    }
}

/// Revenue `1{s <= p} 1{q <= b} (q - p)`.
#[inline]
pub fn rev(pair: &PricePair, v: &Valuation) -> f64 {
    if trades(pair, v) {
        pair.spread
    } else {
        0.0
    }
}

/// Which signal the learner receives after posting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackModel {
    Full,
    TwoBit,
    OneBit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    Full(Valuation),
    TwoBit {
        seller_accepts: bool,
        buyer_accepts: bool,
    },
    OneBit(bool),
}

pub fn observe(pair: &PricePair, v: &Valuation, model: FeedbackModel) -> Feedback {
    match model {
        FeedbackModel::Full => Feedback::Full(*v),
        FeedbackModel::TwoBit => Feedback::TwoBit {
            seller_accepts: v.seller <= pair.seller,
            buyer_accepts: pair.buyer <= v.buyer,
        },
        FeedbackModel::OneBit => Feedback::OneBit(trades(pair, v)),
    }
}

/// Cumulative revenue `B_t`, accumulated with Neumaier's compensated
/// summation so that long horizons do not drift.
#[derive(Debug, Clone, Default)]
pub struct BudgetLedger {
    sum: f64,
    compensation: f64,
    history: Option<Vec<f64>>,
}

impl BudgetLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also keeps every recorded revenue.
    pub fn with_history() -> Self {
        Self {
            history: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn record(&mut self, revenue: f64) {
        let t = self.sum + revenue;
        if self.sum.abs() >= revenue.abs() {
            self.compensation += (self.sum - t) + revenue;
        } else {
            self.compensation += (revenue - t) + self.sum;
        }
        self.sum = t;
        if let Some(h) = self.history.as_mut() {
            h.push(revenue);
        }
    }

    pub fn current(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn history(&self) -> Option<&[f64]> {
        self.history.as_deref()
    }

    /// Whether posting `pair` keeps the worst-case budget non-negative:
    /// `p - q <= B`, compared exactly.
    pub fn feasible(&self, pair: &PricePair) -> bool {
        feasible(pair, self)
    }
}

pub fn feasible(pair: &PricePair, ledger: &BudgetLedger) -> bool {
    pair.deficit() <= ledger.current()
}

/// The oblivious adversary's input: one valuation per round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValuationSequence(Vec<Valuation>);

impl ValuationSequence {
    pub fn new(rounds: Vec<Valuation>) -> Self {
        Self(rounds)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rounds(&self) -> &[Valuation] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Valuation> {
        self.0.iter()
    }

    /// `sum_t GFT_t(pair)`.
    pub fn total_gft(&self, pair: &PricePair) -> f64 {
        self.0.iter().map(|v| gft(pair, v)).sum()
    }

    /// `sum_t REV_t(pair)`.
    pub fn total_rev(&self, pair: &PricePair) -> f64 {
        let trades = self.0.iter().filter(|v| trades(pair, v)).count();
        trades as f64 * pair.spread()
    }
}

impl From<Vec<Valuation>> for ValuationSequence {
    fn from(v: Vec<Valuation>) -> Self {
        Self(v)
    }
}

impl<'a> IntoIterator for &'a ValuationSequence {
    type Item = &'a Valuation;
    type IntoIter = std::slice::Iter<'a, Valuation>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
