use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signorini_solver::{cross_validate, Scheme};

use super::{require_positive, sampled_he, Context, Params};
use crate::recipe::random_admissible;
use crate::report::Check;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossvalParams {
    /// Penalty parameters, in the order the discrepancy must decrease.
    pub epsilons: Vec<f64>,
    pub kappa: f64,
}

impl Default for CrossvalParams {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            kappa: 1.5,
        }
    }
}

impl Params for CrossvalParams {
    fn validate(&self) -> Result<()> {
        require_positive("epsilons", &self.epsilons)?;
        require_positive("kappa", &[self.kappa])?;
        if self.epsilons.len() < 2 {
            return Err(super::bad_param("need at least two epsilons"));
        }
        Ok(())
    }
}

/// The standard test set is the sampled `h_e` plus `data.runs` random
/// admissible data; every case is run with every penalty parameter.
pub(super) fn run(ctx: &mut Context<'_>) -> Result<()> {
    let p: CrossvalParams = ctx.params()?;
    let grid = ctx.grid()?;
    let mut cases = vec![("he".to_string(), sampled_he(&grid)?)];
    for k in 0..ctx.cfg.data.runs {
        cases.push((format!("random{k}"), random_admissible(&grid, &mut ctx.rng)?));
    }
    let proj = ctx.default_solver(p.kappa)?;
    let mut jobs = Vec::new();
    for (ci, _) in cases.iter().enumerate() {
        for &eps in &p.epsilons {
            let mut pen = proj.clone();
            pen.scheme = Scheme::Penalized { epsilon: eps };
            pen.validate()?;
            jobs.push((ci, eps, pen));
        }
    }
    let results = jobs
        .par_iter()
        .map(|(ci, _, pen)| Ok(cross_validate(&cases[*ci].1, pen, &proj)?))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (ci, (name, _)) in cases.iter().enumerate() {
        let mine: Vec<_> = jobs
            .iter()
            .zip(&results)
            .filter(|((c, _, _), _)| *c == ci)
            .map(|((_, eps, _), r)| (*eps, r))
            .collect();
        let mut header = vec!["tau".to_string()];
        header.extend(mine.iter().map(|(e, _)| format!("eps_{e:e}")));
        let series: Vec<Vec<f64>> = (0..mine[0].1.discrepancy.len())
            .map(|k| {
                let mut row = vec![mine[0].1.discrepancy[k].0];
                row.extend(mine.iter().map(|(_, r)| r.discrepancy[k].1));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        ctx.out.csv(&format!("discrepancy_{name}.csv"), &header, &series)?;
        for w in mine.windows(2) {
            let ratio = w[1].1.max_discrepancy / w[0].1.max_discrepancy;
            worst = worst.max(ratio);
            ok &= w[1].1.max_discrepancy < w[0].1.max_discrepancy;
        }
        for (eps, r) in &mine {
            rows.push(vec![ci as f64, *eps, r.max_discrepancy]);
        }
        notes.push(format!(
            "{name}: {}",
            mine.iter()
                .map(|(_, r)| format!("{:.2e}", r.max_discrepancy))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    ctx.out.csv("crossval.csv", &["case", "epsilon", "max_discrepancy"], &rows)?;
    ctx.check(
        Check::new(14, "penalized vs projected cross-validation", ok, worst, 1.0)
            .with_detail(format!("largest successive ratio; {}", notes.join(", "))),
    );
    Ok(())
}
