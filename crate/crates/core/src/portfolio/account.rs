use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::action::{clip_weights, validate_weights};
use super::{Action, Fill, PortfolioError, Quotes, Result, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub quantity: u64,
    /// Volume-weighted purchase price, fees excluded.
    pub avg_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    StopLoss,
    TakeProfit,
}

/// Conditional exit for a whole position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopOrder {
    pub symbol: String,
    pub kind: StopKind,
    pub price: f64,
}

/// Cash and positions only; what ledger replay must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub cash: f64,
    pub positions: BTreeMap<String, Position>,
}

/// Net value and value fractions at one day's close. `cash_weight` plus the asset weights
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub date: NaiveDate,
    pub net_value: f64,
    pub cash_weight: f64,
    pub weights: BTreeMap<String, f64>,
}

impl Mark {
    pub fn invested(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Weights as a simplex vector over `symbols` followed by cash.
    pub fn simplex(&self, symbols: &[String]) -> Vec<f64> {
        let mut v: Vec<f64> = symbols.iter().map(|s| self.weights.get(s).copied().unwrap_or(0.0)).collect();
        v.push(self.cash_weight);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub cash: f64,
    pub positions: BTreeMap<String, Position>,
    pub ledger: Vec<Fill>,
    pub stop_orders: Vec<StopOrder>,
    pub fee_rate: f64,
    pub initial_cash: f64,
}

impl Account {
    pub fn new(initial_cash: f64, fee_rate: f64) -> Self {
        Account {
            cash: initial_cash,
            positions: BTreeMap::new(),
            ledger: Vec::new(),
            stop_orders: Vec::new(),
            fee_rate,
            initial_cash,
        }
    }

    pub fn quantity(&self, symbol: &str) -> u64 {
        self.positions.get(symbol).map_or(0, |p| p.quantity)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            cash: self.cash,
            positions: self.positions.clone(),
        }
    }

    pub fn fee(&self, quantity: u64, price: f64) -> f64 {
        (quantity as f64 * price).abs() * self.fee_rate
    }

    /// Books a fill. Callers have already checked cash and shares.
    fn book(&mut self, fill: Fill) {
        let notional = fill.notional();
        match fill.side {
            Side::Buy => {
                self.cash -= notional + fill.fee;
                let p = self.positions.entry(fill.symbol.clone()).or_insert(Position {
                    quantity: 0,
                    avg_cost: 0.0,
                });
                let q = p.quantity + fill.quantity;
                p.avg_cost = (p.quantity as f64 * p.avg_cost + notional) / q as f64;
                p.quantity = q;
            }
            Side::Sell => {
                self.cash += notional - fill.fee;
                let p = self.positions.get_mut(&fill.symbol).expect("sell of held symbol");
                p.quantity -= fill.quantity;
                if p.quantity == 0 {
                    self.positions.remove(&fill.symbol);
                }
            }
        }
        self.ledger.push(fill);
    }

    fn buy(&mut self, symbol: &str, quantity: u64, price: f64, date: NaiveDate, reason: &str) -> Result<Fill> {
        let fee = self.fee(quantity, price);
        let needed = quantity as f64 * price + fee;
        if needed > self.cash {
            return Err(PortfolioError::InsufficientCash {
                needed,
                available: self.cash,
            });
        }
        let fill = Fill {
            date,
            symbol: symbol.to_string(),
            side: Side::Buy,
            quantity,
            price,
            fee,
            reason: reason.to_string(),
        };
        self.book(fill.clone());
        Ok(fill)
    }

    fn sell(&mut self, symbol: &str, quantity: u64, price: f64, date: NaiveDate, reason: &str) -> Result<Fill> {
        let held = self.quantity(symbol);
        if quantity > held {
            return Err(PortfolioError::InsufficientShares {
                symbol: symbol.to_string(),
                needed: quantity,
                held,
            });
        }
        let fill = Fill {
            date,
            symbol: symbol.to_string(),
            side: Side::Sell,
            quantity,
            price,
            fee: self.fee(quantity, price),
            reason: reason.to_string(),
        };
        self.book(fill.clone());
        Ok(fill)
    }

    /// Largest whole-share buy the current cash covers, fee included.
    fn affordable(&self, price: f64) -> u64 {
        let mut q = (self.cash / (price * (1.0 + self.fee_rate))).floor().max(0.0) as u64;
        while q > 0 && q as f64 * price + self.fee(q, price) > self.cash {
            q -= 1;
        }
        q
    }

    fn close_of(quotes: &impl Quotes, symbol: &str) -> Result<f64> {
        quotes
            .quote(symbol)
            .map(|q| q.close)
            .ok_or_else(|| PortfolioError::UnknownSymbol {
                symbol: symbol.to_string(),
                date: quotes.date(),
            })
    }

    /// Net value and weights at the quoted closes. Every held symbol needs a price.
    pub fn mark(&self, quotes: &impl Quotes) -> Result<Mark> {
        let mut values = BTreeMap::new();
        let mut total = self.cash;
        for (s, p) in &self.positions {
            let close = quotes.quote(s).map(|q| q.close).ok_or_else(|| PortfolioError::MissingPrice {
                symbol: s.clone(),
                date: quotes.date(),
            })?;
            let v = p.quantity as f64 * close;
            total += v;
            values.insert(s.clone(), v);
        }
        let weights = if total > 0.0 {
            values.into_iter().map(|(s, v)| (s, v / total)).collect()
        } else {
            values.into_keys().map(|s| (s, 0.0)).collect()
        };
        Ok(Mark {
            date: quotes.date(),
            net_value: total,
            cash_weight: if total > 0.0 { self.cash / total } else { 1.0 },
            weights,
        })
    }

    /// Executes `action` at today's close. On error the account is unchanged.
    pub fn apply_action(&mut self, action: &Action, quotes: &impl Quotes, reason: &str) -> Result<Vec<Fill>> {
        action.validate()?;
        let ledger = std::mem::take(&mut self.ledger);
        let mut work = self.clone();
        self.ledger = ledger;
        work.execute(action, quotes, reason)?;
        let fills = std::mem::take(&mut work.ledger);
        self.cash = work.cash;
        self.positions = work.positions;
        self.stop_orders = work.stop_orders;
        self.ledger.extend(fills.iter().cloned());
        Ok(fills)
    }

    fn execute(&mut self, action: &Action, quotes: &impl Quotes, reason: &str) -> Result<()> {
        let date = quotes.date();
        match action {
            Action::Hold | Action::MarketScan | Action::GenerateReport => {}
            Action::Buy { symbol, quantity } => {
                let px = Self::close_of(quotes, symbol)?;
                self.buy(symbol, *quantity, px, date, reason)?;
            }
            Action::Sell { symbol, quantity } => {
                let px = Self::close_of(quotes, symbol)?;
                self.sell(symbol, *quantity, px, date, reason)?;
            }
            Action::AdjustQuantityPrice {
                symbol,
                target_quantity,
                limit,
            } => {
                let px = Self::close_of(quotes, symbol)?;
                let cur = self.quantity(symbol);
                if *target_quantity > cur && limit.is_none_or(|l| px <= l) {
                    self.buy(symbol, target_quantity - cur, px, date, reason)?;
                } else if *target_quantity < cur && limit.is_none_or(|l| px >= l) {
                    self.sell(symbol, cur - target_quantity, px, date, reason)?;
                }
            }
            Action::SetStops {
                symbol,
                stop_loss,
                take_profit,
            } => {
                if self.quantity(symbol) == 0 {
                    return Err(PortfolioError::InvalidAction(format!("no position in {symbol} to protect")));
                }
                self.stop_orders.retain(|o| &o.symbol != symbol);
                if let Some(p) = stop_loss {
                    self.stop_orders.push(StopOrder {
                        symbol: symbol.clone(),
                        kind: super::StopKind::StopLoss,
                        price: *p,
                    });
                }
                if let Some(p) = take_profit {
                    self.stop_orders.push(StopOrder {
                        symbol: symbol.clone(),
                        kind: super::StopKind::TakeProfit,
                        price: *p,
                    });
                }
            }
            Action::AdjustRiskExposure { invested } => {
                let mark = self.mark(quotes)?;
                let now = mark.invested();
                if now > 0.0 {
                    let f = invested / now;
                    let targets = mark.weights.iter().map(|(s, w)| (s.clone(), w * f)).collect();
                    self.rebalance(&targets, false, quotes, reason)?;
                }
            }
            Action::ExecuteAllocation { weights } => self.rebalance(weights, false, quotes, reason)?,
            Action::Rebalance { weights } => self.rebalance(weights, true, quotes, reason)?,
            Action::EnforceCompliance { caps } => {
                // Sale fees shrink net value, so a second pass catches what the first left
                // a hair above the cap.
                for _ in 0..4 {
                    let mark = self.mark(quotes)?;
                    let clipped = clip_weights(&mark.weights, caps, |s| quotes.sector(s));
                    let mut sold = false;
                    for (s, w) in &clipped {
                        if *w < mark.weights[s] {
                            let px = Self::close_of(quotes, s)?;
                            let cur = self.quantity(s);
                            // keep·p ≤ w·(NV − fee on the shares sold)
                            let room = w * (mark.net_value - self.fee_rate * cur as f64 * px);
                            let keep = (room / (px * (1.0 - w * self.fee_rate))).floor().max(0.0) as u64;
                            if keep < cur {
                                self.sell(s, cur - keep, px, date, reason)?;
                                sold = true;
                            }
                        }
                    }
                    if !sold {
                        break;
                    }
                }
            }
            Action::InitiateHedge { fraction } => {
                let held: Vec<(String, u64)> = self.positions.iter().map(|(s, p)| (s.clone(), p.quantity)).collect();
                for (s, q) in held {
                    let n = (q as f64 * fraction).floor() as u64;
                    if n > 0 {
                        let px = Self::close_of(quotes, &s)?;
                        self.sell(&s, n, px, date, reason)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Trades toward target weights of current net value. A holding is sold down when it
    /// exceeds `floor(w·NV/p)` shares and bought up to `floor(w·NV/(p·(1+fee)))` when below
    /// that; in between it is left alone so re-submitting current weights does not churn.
    /// Sells run first; buys then run in symbol order, each trimmed to the cash left.
    fn rebalance(
        &mut self,
        weights: &BTreeMap<String, f64>,
        liquidate_others: bool,
        quotes: &impl Quotes,
        reason: &str,
    ) -> Result<()> {
        validate_weights(weights)?;
        let date = quotes.date();
        let nv = self.mark(quotes)?.net_value;
        let mut plan: BTreeMap<String, (f64, u64, u64)> = BTreeMap::new();
        for (s, w) in weights {
            let px = Self::close_of(quotes, s)?;
            let hi = (w * nv / px).floor() as u64;
            let lo = (w * nv / (px * (1.0 + self.fee_rate))).floor() as u64;
            plan.insert(s.clone(), (px, lo, hi));
        }
        if liquidate_others {
            let held: Vec<String> = self.positions.keys().filter(|s| !weights.contains_key(*s)).cloned().collect();
            for s in held {
                let px = Self::close_of(quotes, &s)?;
                plan.insert(s, (px, 0, 0));
            }
        }
        for (s, (px, _, hi)) in &plan {
            let cur = self.quantity(s);
            if cur > *hi {
                self.sell(s, cur - hi, *px, date, reason)?;
            }
        }
        for (s, (px, lo, _)) in &plan {
            let cur = self.quantity(s);
            if cur < *lo {
                let q = (lo - cur).min(self.affordable(*px));
                if q > 0 {
                    self.buy(s, q, *px, date, reason)?;
                }
            }
        }
        Ok(())
    }

    /// Fires stops against today's bar. A stop-loss fills at `min(open, stop)` when the low
    /// reaches it; a take-profit at `max(open, limit)` when the high reaches it. Fired stops
    /// and stops on symbols no longer held are removed. Symbols without a bar today keep
    /// their stops.
    pub fn process_stops(&mut self, quotes: &impl Quotes) -> Vec<Fill> {
        let date = quotes.date();
        let mut fills = Vec::new();
        let orders = std::mem::take(&mut self.stop_orders);
        let mut kept = Vec::new();
        for o in orders {
            let held = self.quantity(&o.symbol);
            if held == 0 {
                continue;
            }
            let Some(q) = quotes.quote(&o.symbol) else {
                kept.push(o);
                continue;
            };
            let px = match o.kind {
                super::StopKind::StopLoss if q.low <= o.price => Some(q.open.min(o.price)),
                super::StopKind::TakeProfit if q.high >= o.price => Some(q.open.max(o.price)),
                _ => None,
            };
            match px {
                Some(px) => {
                    let reason = match o.kind {
                        super::StopKind::StopLoss => "stop_loss",
                        super::StopKind::TakeProfit => "take_profit",
                    };
                    let fill = self.sell(&o.symbol, held, px, date, reason).expect("whole position is held");
                    fills.push(fill);
                }
                None => kept.push(o),
            }
        }
        kept.retain(|o| self.quantity(&o.symbol) > 0);
        self.stop_orders = kept;
        fills
    }

    /// Rebuilds an account from its fills alone.
    pub fn replay(initial_cash: f64, fee_rate: f64, fills: &[Fill]) -> Result<Account> {
        let mut acct = Account::new(initial_cash, fee_rate);
        for (i, f) in fills.iter().enumerate() {
            if f.quantity == 0 {
                return Err(PortfolioError::Ledger(format!("fill {i}: zero quantity")));
            }
            match f.side {
                Side::Buy if f.notional() + f.fee > acct.cash => {
                    return Err(PortfolioError::Ledger(format!("fill {i}: buy exceeds cash")));
                }
                Side::Sell if f.quantity > acct.quantity(&f.symbol) => {
                    return Err(PortfolioError::Ledger(format!("fill {i}: sell exceeds position")));
                }
                _ => acct.book(f.clone()),
            }
        }
        Ok(acct)
    }
}
