//! Synthetic microservice metrics with a planted DNF per fault type.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const METRICS: usize = 40;
pub const RULES_PER_FAULT: usize = 2;
pub const RULE_LEN: usize = 3;

/// A fault type fires when any of its rules has all of its metrics high.
/// High metrics are drawn from [0.6, 1] and low ones from [0, 0.4], or are
/// exactly 1 and 0 in binary mode.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub fault_types: Vec<String>,
    pub services: Vec<String>,
    pub dnf: BTreeMap<String, Vec<Vec<usize>>>,
    pub binary: bool,
}

pub fn metric_name(j: usize) -> String {
    format!("m{j:02}")
}

impl Scenario {
    pub fn new(seed: u64, n_faults: usize, n_services: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut metrics: Vec<usize> = (0..METRICS).collect();
        metrics.shuffle(&mut rng);
        let fault_types: Vec<String> = (0..n_faults).map(|k| format!("fault_{k}")).collect();
        let per = RULES_PER_FAULT * RULE_LEN;
        let dnf = fault_types
            .iter()
            .enumerate()
            .map(|(k, ft)| {
                let rules = metrics[k * per..(k + 1) * per]
                    .chunks(RULE_LEN)
                    .map(|c| {
                        let mut r = c.to_vec();
                        r.sort_unstable();
                        r
                    })
                    .collect();
                (ft.clone(), rules)
            })
            .collect();
        Scenario {
            fault_types,
            services: (0..n_services).map(|s| format!("svc_{s}")).collect(),
            dnf,
            binary: false,
        }
    }

    pub fn binary(mut self) -> Self {
        self.binary = true;
        self
    }

    pub fn planted_metrics(&self, ft: &str) -> Vec<String> {
        let mut m: Vec<usize> = self.dnf[ft].iter().flatten().copied().collect();
        m.sort_unstable();
        m.dedup();
        m.into_iter().map(metric_name).collect()
    }

    fn firing(&self, high: &[bool]) -> Vec<&str> {
        self.dnf
            .iter()
            .filter(|(_, rules)| rules.iter().any(|r| r.iter().all(|&j| high[j])))
            .map(|(ft, _)| ft.as_str())
            .collect()
    }

    /// High/low pattern that fires exactly `target` (or nothing for `None`).
    fn pattern(&self, rng: &mut ChaCha8Rng, target: Option<&str>) -> Vec<bool> {
        loop {
            let high: Vec<bool> = (0..METRICS).map(|_| rng.gen_bool(0.5)).collect();
            let firing = self.firing(&high);
            let ok = match target {
                Some(t) => firing == [t],
                None => firing.is_empty(),
            };
            if ok {
                return high;
            }
        }
    }

    fn row(&self, out: &mut String, rng: &mut ChaCha8Rng, t: usize, service: &str, label: Option<&str>, high: &[bool]) {
        let _ = write!(out, "{},{service},{}", 1_700_000_000 + 60 * t, label.unwrap_or(""));
        for &h in high {
            if self.binary {
                out.push_str(if h { ",1" } else { ",0" });
                continue;
            }
            let v: f64 = if h { rng.gen_range(0.6..=1.0) } else { rng.gen_range(0.0..=0.4) };
            let _ = write!(out, ",{v:.4}");
        }
        out.push('\n');
    }

    fn header(&self) -> String {
        let mut h = "timestamp,service,fault_type".to_string();
        for j in 0..METRICS {
            let _ = write!(h, ",{}", metric_name(j));
        }
        h.push('\n');
        h
    }

    /// Labelled training CSV. Each fault type gets `n / (ratio + 1)` rows
    /// (so one-vs-rest imbalance is about `1:ratio`); noise swaps that
    /// fraction of its labels with as many normal rows.
    pub fn training_csv(&self, seed: u64, n: usize, ratio: f64, noise: f64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_fault = (n as f64 / (ratio + 1.0)).round() as usize;
        let mut truth: Vec<Option<&str>> = Vec::with_capacity(n);
        for ft in &self.fault_types {
            truth.extend(std::iter::repeat_n(Some(ft.as_str()), per_fault));
        }
        truth.resize(n, None);
        truth.shuffle(&mut rng);
        let mut labels = truth.clone();
        for ft in &self.fault_types {
            let flips = (noise * per_fault as f64).round() as usize;
            let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i] == Some(ft.as_str())).collect();
            let mut neg: Vec<usize> = (0..n).filter(|&i| labels[i].is_none() && truth[i].is_none()).collect();
            pos.shuffle(&mut rng);
            neg.shuffle(&mut rng);
            for (&p, &q) in pos[..flips].iter().zip(&neg[..flips]) {
                labels[p] = None;
                labels[q] = Some(ft.as_str());
            }
        }
        let mut out = self.header();
        for i in 0..n {
            let high = self.pattern(&mut rng, truth[i]);
            let service = &self.services[rng.gen_range(0..self.services.len())];
            self.row(&mut out, &mut rng, i, service, labels[i], &high);
        }
        out
    }

    /// Incident window: `steps` rows per service, the faulty service's rows
    /// all firing `fault`, everything else normal.
    pub fn window_csv(&self, seed: u64, fault: &str, service: &str, steps: usize) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.header();
        for t in 0..steps {
            for s in &self.services {
                let target = (s == service).then_some(fault);
                let high = self.pattern(&mut rng, target);
                self.row(&mut out, &mut rng, t, s, None, &high);
            }
        }
        out
    }
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
