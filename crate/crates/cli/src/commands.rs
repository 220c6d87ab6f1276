//! The four batch commands. Each produces a deterministic row list plus
//! an all-clear flag that is false iff some asserted inequality came back
//! false.

use anyhow::{anyhow, Context, Result};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use jn_core::concentration::check_bollobas;
use jn_core::construction::{
    build_mu_capped, rectangle_report, ASpec, BSpec, RectangleSpec, DEFAULT_ENUMERATION_CAP,
};
use jn_core::numerics::{decimal_string, to_f64_approx, Rational};
use jn_core::optimizer::{decay_table, MethodChoice};
use jn_core::transfer::{pushforward, ModelSpace, TestFunction};

fn num(r: &Rational) -> String {
    r.numer().to_string()
}

fn den(r: &Rational) -> String {
    r.denom().to_string()
}

// ---- mu-table ----------------------------------------------------------

#[derive(Serialize)]
pub struct MuRow {
    pub n: u64,
    #[serde(rename = "W_num")]
    pub w_num: String,
    #[serde(rename = "W_den")]
    pub w_den: String,
    #[serde(rename = "W_decimal")]
    pub w_decimal: String,
    pub witness_m: String,
    #[serde(rename = "W_times_sqrt_n_decimal")]
    pub w_times_sqrt_n: String,
    pub method: String,
    pub note: String,
}

pub const MU_HEADERS: &[&str] = &[
    "n", "W_num", "W_den", "W_decimal", "witness_m", "W_times_sqrt_n_decimal", "method", "note",
];

pub fn cmd_mu_table(ns: &[u64], method: MethodChoice, precision: usize) -> (Vec<MuRow>, bool) {
    let rows = decay_table(ns, method)
        .into_iter()
        .map(|row| match row.outcome {
            Ok(rec) => MuRow {
                n: row.n,
                w_num: num(&rec.value),
                w_den: den(&rec.value),
                w_decimal: decimal_string(&rec.value, precision),
                witness_m: rec.witness_m.to_string(),
                w_times_sqrt_n: format!(
                    "{:.6}",
                    to_f64_approx(&rec.value) * (row.n as f64).sqrt()
                ),
                method: rec.method.label().to_string(),
                note: String::new(),
            },
            Err(e) => MuRow {
                n: row.n,
                w_num: String::new(),
                w_den: String::new(),
                w_decimal: String::new(),
                witness_m: String::new(),
                w_times_sqrt_n: String::new(),
                method: String::new(),
                note: e.to_string(),
            },
        })
        .collect();
    (rows, true)
}

// ---- check-bollobas ----------------------------------------------------

#[derive(Serialize)]
pub struct BollobasRow {
    pub m: u64,
    pub eps_num: String,
    pub eps_den: String,
    pub tail_num: String,
    pub tail_den: String,
    pub tail_decimal: String,
    pub holds: String,
    pub note: String,
}

pub const BOLLOBAS_HEADERS: &[&str] = &[
    "m", "eps_num", "eps_den", "tail_num", "tail_den", "tail_decimal", "holds", "note",
];

/// The canonical m-grid for one eps: 201 values from ceil(48/eps) up,
/// plus the fixed probes 1000 and 2000.
pub fn default_m_grid(eps: &Rational) -> Result<Vec<u64>> {
    let start = ((BigInt::from(48) * eps.denom() + eps.numer() - BigInt::from(1)) / eps.numer())
        .to_u64()
        .ok_or_else(|| anyhow!("48/eps out of range for eps = {eps}"))?;
    let mut grid: Vec<u64> = (start..=start + 200).collect();
    for probe in [1000, 2000] {
        if !grid.contains(&probe) {
            grid.push(probe);
        }
    }
    grid.sort_unstable();
    Ok(grid)
}

pub fn cmd_check_bollobas(
    eps_list: &[Rational],
    m_range: Option<(u64, u64)>,
    precision: usize,
) -> Result<(Vec<BollobasRow>, bool)> {
    let mut rows = Vec::new();
    let mut all_hold = true;
    for eps in eps_list {
        let ms: Vec<u64> = match m_range {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => default_m_grid(eps)?,
        };
        for m in ms {
            match check_bollobas(m, eps) {
                Ok(report) => {
                    all_hold &= report.holds;
                    rows.push(BollobasRow {
                        m,
                        eps_num: eps.numer().to_string(),
                        eps_den: eps.denom().to_string(),
                        tail_num: num(&report.lhs),
                        tail_den: den(&report.lhs),
                        tail_decimal: decimal_string(&report.lhs, precision),
                        holds: report.holds.to_string(),
                        note: String::new(),
                    });
                }
                Err(e) => rows.push(BollobasRow {
                    m,
                    eps_num: eps.numer().to_string(),
                    eps_den: eps.denom().to_string(),
                    tail_num: String::new(),
                    tail_den: String::new(),
                    tail_decimal: String::new(),
                    holds: String::new(),
                    note: e.to_string(),
                }),
            }
        }
    }
    Ok((rows, all_hold))
}

// ---- rectangle-eval ----------------------------------------------------

#[derive(Serialize)]
pub struct RectRow {
    pub n: u64,
    pub spec: usize,
    pub sample: u64,
    pub eps_num: String,
    pub eps_den: String,
    pub value_num: String,
    pub value_den: String,
    pub value_decimal: String,
    pub size_a: String,
    pub size_b: String,
    pub dagger_num: String,
    pub dagger_den: String,
    pub dagger_holds: String,
    pub remark_kind: String,
    pub remark_params: String,
    pub remark_holds: String,
    pub t1_num: String,
    pub t1_den: String,
    pub t2_num: String,
    pub t2_den: String,
    pub p_delta_num: String,
    pub p_delta_den: String,
    pub verdict_a: String,
    pub verdict_b: String,
    pub verdict_c: String,
    pub verdict_d: String,
    pub flags: String,
    pub note: String,
}

pub const RECT_HEADERS: &[&str] = &[
    "n", "spec", "sample", "eps_num", "eps_den", "value_num", "value_den", "value_decimal",
    "size_a", "size_b", "dagger_num", "dagger_den", "dagger_holds", "remark_kind",
    "remark_params", "remark_holds", "t1_num", "t1_den", "t2_num", "t2_den", "p_delta_num",
    "p_delta_den", "verdict_a", "verdict_b", "verdict_c", "verdict_d", "flags", "note",
];

/// Parse a spec file: a JSON array of rectangle specs, or a single one.
pub fn load_specs(path: &std::path::Path) -> Result<Vec<RectangleSpec>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading spec file {}", path.display()))?;
    if let Ok(list) = serde_json::from_str::<Vec<RectangleSpec>>(&text) {
        return Ok(list);
    }
    serde_json::from_str::<RectangleSpec>(&text)
        .map(|s| vec![s])
        .map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

/// Shift the seeds of random spec components; the base seed and the
/// sample index move every draw deterministically.
fn shift_seeds(spec: &RectangleSpec, offset: u64) -> RectangleSpec {
    let mut spec = spec.clone();
    if let ASpec::Random { seed, .. } = &mut spec.a {
        *seed = seed.wrapping_add(offset);
    }
    if let BSpec::Random { seed, .. } = &mut spec.b {
        *seed = seed.wrapping_add(offset);
    }
    spec
}

fn has_random_part(spec: &RectangleSpec) -> bool {
    matches!(spec.a, ASpec::Random { .. }) || matches!(spec.b, BSpec::Random { .. })
}

pub fn cmd_rectangle_eval(
    specs: &[RectangleSpec],
    ns: &[u64],
    eps_list: &[Rational],
    samples: u64,
    base_seed: u64,
    precision: usize,
) -> Result<(Vec<RectRow>, bool)> {
    let mut rows = Vec::new();
    let mut all_hold = true;
    for &n in ns {
        let n32 = u32::try_from(n).map_err(|_| anyhow!("level {n} too large"))?;
        for (spec_idx, spec) in specs.iter().enumerate() {
            let replicas = if has_random_part(spec) { samples.max(1) } else { 1 };
            for sample in 0..replicas {
                let shifted = shift_seeds(spec, base_seed.wrapping_add(sample));
                for eps in eps_list {
                    let mut row = RectRow {
                        n,
                        spec: spec_idx,
                        sample,
                        eps_num: eps.numer().to_string(),
                        eps_den: eps.denom().to_string(),
                        value_num: String::new(),
                        value_den: String::new(),
                        value_decimal: String::new(),
                        size_a: String::new(),
                        size_b: String::new(),
                        dagger_num: String::new(),
                        dagger_den: String::new(),
                        dagger_holds: String::new(),
                        remark_kind: String::new(),
                        remark_params: String::new(),
                        remark_holds: String::new(),
                        t1_num: String::new(),
                        t1_den: String::new(),
                        t2_num: String::new(),
                        t2_den: String::new(),
                        p_delta_num: String::new(),
                        p_delta_den: String::new(),
                        verdict_a: String::new(),
                        verdict_b: String::new(),
                        verdict_c: String::new(),
                        verdict_d: String::new(),
                        flags: String::new(),
                        note: String::new(),
                    };
                    match rectangle_report(&shifted, n32, eps, DEFAULT_ENUMERATION_CAP) {
                        Ok(rep) => {
                            let t = &rep.trace;
                            let verdicts =
                                t.holds_a && t.holds_b && t.holds_c && t.holds_d;
                            all_hold &= rep.dagger_holds && rep.remark_holds && verdicts;
                            let mut flags = Vec::new();
                            if t.degenerate_b {
                                flags.push("degenerate-b");
                            }
                            if t.boundary_c {
                                flags.push("boundary-c");
                            }
                            if !t.d_applicable {
                                flags.push("d-vacuous");
                            }
                            row.value_num = num(&rep.value);
                            row.value_den = den(&rep.value);
                            row.value_decimal = decimal_string(&rep.value, precision);
                            row.size_a = rep.size_a.to_string();
                            row.size_b = rep.size_b.to_string();
                            row.dagger_num = num(&rep.dagger);
                            row.dagger_den = den(&rep.dagger);
                            row.dagger_holds = rep.dagger_holds.to_string();
                            row.remark_kind = rep.remark.kind().to_string();
                            row.remark_params = rep.remark.params();
                            row.remark_holds = rep.remark_holds.to_string();
                            row.t1_num = num(&t.t1);
                            row.t1_den = den(&t.t1);
                            row.t2_num = num(&t.t2);
                            row.t2_den = den(&t.t2);
                            row.p_delta_num = num(&t.p_delta);
                            row.p_delta_den = den(&t.p_delta);
                            row.verdict_a = t.holds_a.to_string();
                            row.verdict_b = t.holds_b.to_string();
                            row.verdict_c = t.holds_c.to_string();
                            row.verdict_d = t.holds_d.to_string();
                            row.flags = flags.join(";");
                        }
                        Err(e) => row.note = e.to_string(),
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok((rows, all_hold))
}

// ---- transfer-demo -----------------------------------------------------

#[derive(Serialize)]
pub struct DemoRowOut {
    pub n: u64,
    pub f_name: String,
    pub model_k: String,
    pub model_l: String,
    pub value_decimal: String,
    pub value_num: String,
    pub value_den: String,
    pub note: String,
}

pub const DEMO_HEADERS: &[&str] = &[
    "n", "f_name", "model_k", "model_l", "value_decimal", "value_num", "value_den", "note",
];

pub fn cmd_transfer_demo(
    model_k: ModelSpace,
    model_l: ModelSpace,
    functions: &[TestFunction],
    n_max: u32,
    precision: usize,
) -> (Vec<DemoRowOut>, bool) {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let pushed = build_mu_capped(n, DEFAULT_ENUMERATION_CAP)
            .and_then(|mu| pushforward(&mu, model_k, model_l));
        match pushed {
            Ok(rho) => {
                for f in functions {
                    let value = rho.integrate(|pt| f.eval(&pt.x, &pt.y));
                    rows.push(DemoRowOut {
                        n: n as u64,
                        f_name: f.name().to_string(),
                        model_k: model_k.name().to_string(),
                        model_l: model_l.name().to_string(),
                        value_decimal: decimal_string(&value, precision),
                        value_num: num(&value),
                        value_den: den(&value),
                        note: String::new(),
                    });
                }
            }
            Err(e) => {
                for f in functions {
                    rows.push(DemoRowOut {
                        n: n as u64,
                        f_name: f.name().to_string(),
                        model_k: model_k.name().to_string(),
                        model_l: model_l.name().to_string(),
                        value_decimal: String::new(),
                        value_num: String::new(),
                        value_den: String::new(),
                        note: e.to_string(),
                    });
                }
            }
        }
    }
    (rows, true)
}
