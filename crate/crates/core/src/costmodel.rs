//! Equipment cost: paying per offloaded request versus buying an edge CPU.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostInputs {
    pub price_per_request_usd: f64,
    pub request_rate_per_s: f64,
    pub edge_capex_usd: f64,
    pub horizon_s: Option<f64>,
}

impl Default for CostInputs {
    fn default() -> Self {
        CostInputs {
            price_per_request_usd: 2e-5,
            request_rate_per_s: 40.0,
            edge_capex_usd: 1000.0,
            horizon_s: None,
        }
    }
}

impl CostInputs {
    pub fn is_valid(&self) -> bool {
        self.price_per_request_usd >= 0.0 && self.request_rate_per_s >= 0.0 && self.edge_capex_usd > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Breakeven {
    At(f64),
    Never,
}

impl Breakeven {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Breakeven::At(s) => Some(s),
            Breakeven::Never => None,
        }
    }
}

/// Dollars paid for offloading over `horizon_s`.
pub fn vcc_spend(inputs: &CostInputs, horizon_s: f64) -> f64 {
    inputs.price_per_request_usd * inputs.request_rate_per_s * horizon_s
}

/// Time until per-request spend equals the edge capex.
pub fn breakeven_time(inputs: &CostInputs) -> Breakeven {
    let per_second = inputs.price_per_request_usd * inputs.request_rate_per_s;
    if per_second > 0.0 {
        Breakeven::At(inputs.edge_capex_usd / per_second)
    } else {
        Breakeven::Never
    }
}

/// Smallest whole number of requests whose cost reaches the capex.
pub fn breakeven_requests(inputs: &CostInputs) -> Option<u64> {
    let price = inputs.price_per_request_usd;
    if price <= 0.0 {
        return None;
    }
    let capex = inputs.edge_capex_usd;
    // The float quotient can sit an ulp off an exact integer; settle on the
    // count by checking the spend directly.
    let mut n = (capex / price).floor().max(0.0) as u64;
    while (n as f64) * price < capex {
        n += 1;
    }
    while n > 0 && ((n - 1) as f64) * price >= capex {
        n -= 1;
    }
    Some(n)
}

const SECONDS_PER_DAY: f64 = 86_400.0;
const SECONDS_PER_YEAR: f64 = 365.25 * SECONDS_PER_DAY;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub inputs: CostInputs,
    pub spend_per_second_usd: f64,
    pub spend_over_horizon_usd: Option<f64>,
    pub breakeven_requests: Option<u64>,
    pub breakeven_s: Option<f64>,
    pub breakeven_days: Option<f64>,
    pub breakeven_years: Option<f64>,
}

pub fn report(inputs: &CostInputs) -> CostReport {
    let be = breakeven_time(inputs).seconds();
    CostReport {
        inputs: *inputs,
        spend_per_second_usd: vcc_spend(inputs, 1.0),
        spend_over_horizon_usd: inputs.horizon_s.map(|h| vcc_spend(inputs, h)),
        breakeven_requests: breakeven_requests(inputs),
        breakeven_s: be,
        breakeven_days: be.map(|s| s / SECONDS_PER_DAY),
        breakeven_years: be.map(|s| s / SECONDS_PER_YEAR),
    }
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>, unit: &str| match v {
            Some(x) => format!("{x} {unit}"),
            None => "never".to_string(),
        };
        let mut s = String::new();
        s.push_str(&format!("price_per_request_usd: {}\n", self.inputs.price_per_request_usd));
        s.push_str(&format!("request_rate_per_s:    {}\n", self.inputs.request_rate_per_s));
        s.push_str(&format!("edge_capex_usd:        {}\n", self.inputs.edge_capex_usd));
        s.push_str(&format!("spend_per_second_usd:  {}\n", self.spend_per_second_usd));
        if let Some(h) = self.inputs.horizon_s {
            s.push_str(&format!(
                "spend over {h} s:       {} usd\n",
                self.spend_over_horizon_usd.unwrap_or(0.0)
            ));
        }
        s.push_str(&format!(
            "breakeven_requests:    {}\n",
            self.breakeven_requests.map_or("never".to_string(), |n| n.to_string())
        ));
        s.push_str(&format!("breakeven:             {}\n", opt(self.breakeven_s, "s")));
        s.push_str(&format!("                       {}\n", opt(self.breakeven_days, "days")));
        s.push_str(&format!("                       {}\n", opt(self.breakeven_years, "years")));
        s
    }
}
