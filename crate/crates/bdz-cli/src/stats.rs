//! The `stats` subcommand: container geometry, graph sizes, and per-level
//! bit budgets.

use bdz::coder::{bits_from_bytes, encode_with_stats};
use bdz::robdd::{quasi_reduced_vertex_count, DyadicCore};
use serde::Serialize;

use crate::AppError;

#[derive(Serialize)]
pub struct StatsReport {
    pub n: u64,
    pub padded_len: u64,
    pub reduce_exp: u32,
    pub core_len: u64,
    pub core_k: u32,
    /// True when the core is a single bit (no graph, one literal).
    pub constant: bool,
    pub vertex_count: u64,
    pub quasi_vertex_count: u64,
    /// `|S_1| + ... + |S_{k+1}|`.
    pub sum_s: u64,
    pub levels: Vec<LevelRow>,
    pub body_bits: u64,
    pub container_bits: u64,
    pub total_bits: u64,
    pub paper_m_total: u64,
    /// `4 * sum_s + sum(rank widths)`, the coarse body-bit bound.
    pub coarse_bound_bits: u64,
    /// `sum_s / (2^(k+1) * 2 / k)`; near or below 1 for typical inputs.
    pub sum_s_ratio: Option<f64>,
}

#[derive(Serialize)]
pub struct LevelRow {
    pub level: u32,
    pub s_len: u64,
    pub hat_len: u64,
    pub q_sum: u64,
    pub rank1_bits: u64,
    pub fa_bits: u64,
    pub rank2_bits: u64,
    pub paper_m: u64,
    pub actual_bits: u64,
}

pub fn build_report(raw: &[u8]) -> Result<StatsReport, AppError> {
    let bits = bits_from_bytes(raw);
    let (_, stats) = encode_with_stats(&bits)?;

    let quasi = if stats.constant {
        0
    } else {
        let mut padded = bits;
        padded.resize(stats.padded_len as usize, 0);
        padded.truncate(stats.core_len as usize);
        let core = DyadicCore::new(padded).expect("encoder reduced to a dyadic core");
        quasi_reduced_vertex_count(&core) as u64
    };

    let levels: Vec<LevelRow> = stats
        .budgets
        .iter()
        .enumerate()
        .map(|(i, b)| LevelRow {
            level: i as u32 + 2,
            s_len: b.freq_bits,
            hat_len: b.type_bits,
            q_sum: b.power_bits,
            rank1_bits: b.rank1_bits,
            fa_bits: b.fa_bits,
            rank2_bits: b.rank2_bits,
            paper_m: b.paper_m(),
            actual_bits: b.actual_bits(),
        })
        .collect();

    let sum_s_ratio = (!stats.constant && stats.core_k > 0).then(|| {
        let k = stats.core_k as f64;
        stats.sum_s as f64 * k / (2f64.powi(stats.core_k as i32 + 2))
    });

    Ok(StatsReport {
        n: stats.n,
        padded_len: stats.padded_len,
        reduce_exp: stats.reduce_exp,
        core_len: stats.core_len,
        core_k: stats.core_k,
        constant: stats.constant,
        vertex_count: stats.vertex_count,
        quasi_vertex_count: quasi,
        sum_s: stats.sum_s,
        levels,
        body_bits: stats.body_bits,
        container_bits: stats.container_bits,
        total_bits: stats.total_bits,
        paper_m_total: stats.paper_m_total(),
        coarse_bound_bits: stats.coarse_bound_bits(),
        sum_s_ratio,
    })
}

pub fn render_table(r: &StatsReport) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("input bits          {}", r.n));
    line(format!(
        "padded / reduced    {} / 2^{} halvings -> core {} (k = {})",
        r.padded_len, r.reduce_exp, r.core_len, r.core_k
    ));
    if r.constant {
        line("core                constant (single literal bit)".to_string());
    } else {
        line(format!(
            "vertices            {} reduced, {} quasi-reduced",
            r.vertex_count, r.quasi_vertex_count
        ));
        line(format!(
            "sum |S_i|           {} (ratio to 2^(k+1)*2/k: {:.4})",
            r.sum_s,
            r.sum_s_ratio.unwrap_or(f64::NAN)
        ));
        line(format!(
            "{:>5} {:>7} {:>7} {:>6} {:>6} {:>5} {:>6} {:>8} {:>8}",
            "level", "|S_i|", "|hatS|", "Q_i", "rank1", "fa", "rank2", "paper_M", "actual"
        ));
        for row in &r.levels {
            line(format!(
                "{:>5} {:>7} {:>7} {:>6} {:>6} {:>5} {:>6} {:>8} {:>8}",
                row.level,
                row.s_len,
                row.hat_len,
                row.q_sum,
                row.rank1_bits,
                row.fa_bits,
                row.rank2_bits,
                row.paper_m,
                row.actual_bits
            ));
        }
    }
    line(format!(
        "bits                body {} + container {} = {}",
        r.body_bits, r.container_bits, r.total_bits
    ));
    line(format!(
        "bounds              paper M total {}, coarse bound {}",
        r.paper_m_total, r.coarse_bound_bits
    ));
    out
}
