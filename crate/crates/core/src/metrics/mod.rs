//! Evaluation framework: pooled distance/angle histograms compared by
//! Jensen-Shannon divergence (natural log), conformer matching with
//! torsion-space differential evolution, and molecular-weight-constrained
//! set filtering.

mod conformer;

pub use conformer::{
    conformer_match, conformer_match_with, prepare_docking_inputs, ConformerMatch, DeConfig,
    DockingPrep,
};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec;
use crate::molgraph::{BondOrder, Element, Molecule};

/// Distance histograms: 0.25 Å bins, pairs pooled up to 12 Å.
pub const DISTANCE_BIN_WIDTH: f64 = 0.25;
pub const DISTANCE_MAX: f64 = 12.0;
/// Angle histograms: 2.5° bins over [0°, 180°].
pub const ANGLE_BIN_WIDTH: f64 = 2.5;
pub const ANGLE_MAX: f64 = 180.0;

/// Uniform-bin histogram. Counts stay raw until [`Histogram::normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    min: f64,
    bin_width: f64,
    counts: Vec<f64>,
    normalized: bool,
}

impl Histogram {
    pub fn new(min: f64, max: f64, bin_width: f64) -> Result<Histogram> {
        if !(bin_width > 0.0) || !(max > min) {
            return Err(Error::Metric("histogram bins must be increasing".into()));
        }
        let bins = ((max - min) / bin_width).round() as usize;
        if bins == 0 {
            return Err(Error::Metric("histogram needs at least one bin".into()));
        }
        Ok(Histogram {
            min,
            bin_width,
            counts: vec![0.0; bins],
            normalized: false,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn max(&self) -> f64 {
        self.min + self.bin_width * self.counts.len() as f64
    }

    /// Add one observation. Values outside [min, max] are dropped; a
    /// value exactly at the top edge lands in the last bin.
    pub fn add(&mut self, value: f64) {
        let max = self.max();
        if !value.is_finite() || value < self.min || value > max {
            return;
        }
        let last = self.counts.len() - 1;
        let idx = if value >= max - 1e-12 {
            last
        } else {
            (((value - self.min) / self.bin_width) as usize).min(last)
        };
        self.counts[idx] += 1.0;
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn same_binning(&self, other: &Histogram) -> bool {
        (self.min - other.min).abs() < 1e-12
            && (self.bin_width - other.bin_width).abs() < 1e-12
            && self.counts.len() == other.counts.len()
    }

    /// Accumulate another histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if !self.same_binning(other) {
            return Err(Error::Metric("histogram binnings differ".into()));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        Ok(())
    }

    /// Probability-normalized copy (sums to 1).
    pub fn normalized(&self) -> Result<Histogram> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::Metric("cannot normalize an empty histogram".into()));
        }
        Ok(Histogram {
            min: self.min,
            bin_width: self.bin_width,
            counts: self.counts.iter().map(|c| c / total).collect(),
            normalized: true,
        })
    }
}

/// Which pairwise distances to pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    AllAtom,
    CarbonCarbon,
}

/// Pooled intra-molecular pairwise heavy-atom distances over a set.
pub fn distance_hist(molecules: &[Molecule], mode: DistanceMode) -> Result<Histogram> {
    distance_hist_binned(molecules, mode, DISTANCE_BIN_WIDTH)
}

/// Distance histogram with a custom bin width.
pub fn distance_hist_binned(
    molecules: &[Molecule],
    mode: DistanceMode,
    bin_width: f64,
) -> Result<Histogram> {
    Histogram::new(0.0, DISTANCE_MAX, bin_width)?;
    let partial: Vec<Histogram> = exec::map_collect(molecules, move |mol| {
        let mut h = Histogram::new(0.0, DISTANCE_MAX, bin_width).expect("validated bins");
        let atoms = mol.atoms();
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if mode == DistanceMode::CarbonCarbon
                    && (atoms[i].element != Element::C || atoms[j].element != Element::C)
                {
                    continue;
                }
                h.add((atoms[i].coord - atoms[j].coord).norm());
            }
        }
        h
    });
    let mut pooled = Histogram::new(0.0, DISTANCE_MAX, bin_width)?;
    for h in &partial {
        pooled.merge(h)?;
    }
    Ok(pooled)
}

/// Element-triple bond-angle pattern, e.g. `CCC`, `NCC`, or `CC=O`
/// (`=` requires a double bond between the middle and last atoms).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnglePattern {
    pub first: Element,
    pub middle: Element,
    pub last: Element,
    pub last_bond_double: bool,
    text: String,
}

impl AnglePattern {
    pub fn parse(text: &str) -> Result<AnglePattern> {
        let bad = || Error::Metric(format!("unknown angle pattern '{text}'"));
        let mut elements = Vec::new();
        let mut double_before = Vec::new();
        let mut chars = text.chars().peekable();
        let mut pending_double = false;
        while let Some(c) = chars.next() {
            if c == '=' {
                if pending_double || elements.is_empty() {
                    return Err(bad());
                }
                pending_double = true;
                continue;
            }
            let mut sym = c.to_string();
            if let Some(&next) = chars.peek() {
                if next.is_ascii_lowercase() {
                    sym.push(next);
                    chars.next();
                }
            }
            let element = Element::from_symbol(&sym).ok_or_else(bad)?;
            elements.push(element);
            double_before.push(pending_double);
            pending_double = false;
        }
        if elements.len() != 3 || pending_double || double_before[0] || double_before[1] {
            return Err(bad());
        }
        Ok(AnglePattern {
            first: elements[0],
            middle: elements[1],
            last: elements[2],
            last_bond_double: double_before[2],
            text: text.to_string(),
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Standard report patterns: CCC, CCO, CNC, NCC, CC=O.
    pub fn defaults() -> Vec<AnglePattern> {
        ["CCC", "CCO", "CNC", "NCC", "CC=O"]
            .iter()
            .map(|t| AnglePattern::parse(t).expect("static patterns"))
            .collect()
    }

    fn matches(&self, mol: &Molecule, a: usize, b: usize, c: usize) -> bool {
        if mol.atom(a).element != self.first
            || mol.atom(b).element != self.middle
            || mol.atom(c).element != self.last
        {
            return false;
        }
        if self.last_bond_double {
            let bond = mol
                .bond_between(b, c)
                .expect("neighbor pair shares a bond");
            if mol.bonds()[bond].order != BondOrder::Double {
                return false;
            }
        }
        true
    }
}

/// Bond-angle histogram in degrees for one pattern, pooled over a set.
/// Every bonded path a-b-c is tested once per unordered (a, c) pair.
pub fn angle_hist(molecules: &[Molecule], pattern: &AnglePattern) -> Result<Histogram> {
    angle_hist_binned(molecules, pattern, ANGLE_BIN_WIDTH)
}

/// Angle histogram with a custom bin width (degrees).
pub fn angle_hist_binned(
    molecules: &[Molecule],
    pattern: &AnglePattern,
    bin_width: f64,
) -> Result<Histogram> {
    Histogram::new(0.0, ANGLE_MAX, bin_width)?;
    let partial: Vec<Histogram> = exec::map_collect(molecules, move |mol| {
        let mut h = Histogram::new(0.0, ANGLE_MAX, bin_width).expect("validated bins");
        for b in 0..mol.atoms().len() {
            let neighbors: Vec<usize> = mol.neighbors(b).iter().map(|&(n, _)| n).collect();
            for x in 0..neighbors.len() {
                for y in x + 1..neighbors.len() {
                    let (a, c) = (neighbors[x], neighbors[y]);
                    if pattern.matches(mol, a, b, c) || pattern.matches(mol, c, b, a) {
                        let va = mol.atom(a).coord - mol.atom(b).coord;
                        let vc = mol.atom(c).coord - mol.atom(b).coord;
                        let cos = va.dot(&vc) / (va.norm() * vc.norm());
                        let angle = cos.clamp(-1.0, 1.0).acos().to_degrees();
                        h.add(angle);
                    }
                }
            }
        }
        h
    });
    let mut pooled = Histogram::new(0.0, ANGLE_MAX, bin_width)?;
    for h in &partial {
        pooled.merge(h)?;
    }
    Ok(pooled)
}

/// Jensen-Shannon divergence in nats (bounded by ln 2). Inputs may be
/// raw or normalized; binnings must match.
pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64> {
    if !p.same_binning(q) {
        return Err(Error::Metric("jsd inputs have different binnings".into()));
    }
    let pn = p.normalized()?;
    let qn = q.normalized()?;
    let kl_to_mid = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                if xi <= 0.0 {
                    0.0
                } else {
                    let mi = 0.5 * (xi + yi);
                    xi * (xi / mi).ln()
                }
            })
            .sum()
    };
    let value = 0.5 * kl_to_mid(pn.counts(), qn.counts()) + 0.5 * kl_to_mid(qn.counts(), pn.counts());
    Ok(value.max(0.0))
}

/// Standard-deviation convention for the weight-range protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaConvention {
    Population,
    Sample,
}

impl SigmaConvention {
    pub fn code(&self) -> &'static str {
        match self {
            SigmaConvention::Population => "population",
            SigmaConvention::Sample => "sample",
        }
    }
}

/// Per-pocket molecular-weight interval [μ−σ, μ+σ] after 20% tail
/// trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct MwRange {
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub kept: usize,
    pub total: usize,
}

impl MwRange {
    pub fn contains(&self, weight: f64) -> bool {
        weight >= self.lower && weight <= self.upper
    }
}

/// Weight ranges per pocket with the population-σ convention.
pub fn mw_ranges(per_pocket: &BTreeMap<String, Vec<f64>>) -> Result<BTreeMap<String, MwRange>> {
    mw_ranges_with(per_pocket, SigmaConvention::Population)
}

pub fn mw_ranges_with(
    per_pocket: &BTreeMap<String, Vec<f64>>,
    convention: SigmaConvention,
) -> Result<BTreeMap<String, MwRange>> {
    let mut out = BTreeMap::new();
    for (pocket, weights) in per_pocket {
        out.insert(pocket.clone(), mw_range_single(pocket, weights, convention)?);
    }
    Ok(out)
}

/// One pocket's range: sort, drop ⌊0.2·n⌋ from each end, take μ ± σ.
pub fn mw_range_single(
    pocket: &str,
    weights: &[f64],
    convention: SigmaConvention,
) -> Result<MwRange> {
    let n = weights.len();
    if n < 5 {
        return Err(Error::Metric(format!(
            "pocket '{pocket}' has {n} molecules; at least 5 are required"
        )));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let drop = n / 5;
    let survivors = &sorted[drop..n - drop];
    let k = survivors.len() as f64;
    let mean = survivors.iter().sum::<f64>() / k;
    let ss: f64 = survivors.iter().map(|w| (w - mean).powi(2)).sum();
    let std_dev = match convention {
        SigmaConvention::Population => (ss / k).sqrt(),
        SigmaConvention::Sample => (ss / (k - 1.0)).sqrt(),
    };
    let range = MwRange {
        lower: mean - std_dev,
        upper: mean + std_dev,
        mean,
        std_dev,
        kept: survivors.len(),
        total: n,
    };
    if !(range.lower < range.upper) {
        return Err(Error::Metric(format!(
            "pocket '{pocket}' yields a degenerate weight range [{:.2}, {:.2}]",
            range.lower, range.upper
        )));
    }
    Ok(range)
}

/// Closed-interval weight filter.
pub fn mw_filter(molecules: &[Molecule], range: &MwRange) -> Vec<Molecule> {
    molecules
        .iter()
        .filter(|m| range.contains(m.molecular_weight()))
        .cloned()
        .collect()
}

/// Evaluation options.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub patterns: Vec<AnglePattern>,
    pub de: DeConfig,
    pub distance_bin: f64,
    pub angle_bin: f64,
}

impl Default for EvalOptions {
    fn default() -> EvalOptions {
        EvalOptions {
            patterns: AnglePattern::defaults(),
            de: DeConfig::default(),
            distance_bin: DISTANCE_BIN_WIDTH,
            angle_bin: ANGLE_BIN_WIDTH,
        }
    }
}

/// Summary of a value distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Option<SummaryStats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let quantile = |q: f64| -> f64 {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        };
        Some(SummaryStats {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: quantile(0.5),
            q1: quantile(0.25),
            q3: quantile(0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Full evaluation report. JSD entries are `None` when a pattern matched
/// nothing in one of the sets.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub distance_bin: f64,
    pub angle_bin: f64,
    pub generated_count: usize,
    pub reference_count: usize,
    pub ff_count: Option<usize>,
    pub jsd_distance_all_atom: Option<f64>,
    pub jsd_distance_cc: Option<f64>,
    /// (pattern text, JSD vs reference).
    pub jsd_angles_vs_reference: Vec<(String, Option<f64>)>,
    /// (pattern text, JSD vs force-field-optimized set).
    pub jsd_angles_vs_ff: Vec<(String, Option<f64>)>,
    pub conformer_rmsd: Option<SummaryStats>,
}

/// Compare a generated set against a reference set, and optionally
/// against force-field-optimized conformers matched 1:1 to the
/// generated records.
pub fn evaluate(
    generated: &[Molecule],
    reference: &[Molecule],
    ff_optimized: Option<&[Molecule]>,
    options: &EvalOptions,
) -> Result<MetricReport> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::Metric(
            "evaluate needs non-empty generated and reference sets".into(),
        ));
    }

    let maybe_jsd = |p: &Histogram, q: &Histogram| -> Option<f64> {
        if p.total() > 0.0 && q.total() > 0.0 {
            jsd(p, q).ok()
        } else {
            None
        }
    };

    let gen_all = distance_hist_binned(generated, DistanceMode::AllAtom, options.distance_bin)?;
    let ref_all = distance_hist_binned(reference, DistanceMode::AllAtom, options.distance_bin)?;
    let gen_cc = distance_hist_binned(generated, DistanceMode::CarbonCarbon, options.distance_bin)?;
    let ref_cc = distance_hist_binned(reference, DistanceMode::CarbonCarbon, options.distance_bin)?;

    let mut jsd_angles_vs_reference = Vec::new();
    for pattern in &options.patterns {
        let g = angle_hist_binned(generated, pattern, options.angle_bin)?;
        let r = angle_hist_binned(reference, pattern, options.angle_bin)?;
        jsd_angles_vs_reference.push((pattern.text().to_string(), maybe_jsd(&g, &r)));
    }

    let mut jsd_angles_vs_ff = Vec::new();
    let mut conformer_rmsd = None;
    let mut ff_count = None;
    if let Some(ff) = ff_optimized {
        if ff.len() != generated.len() {
            return Err(Error::Metric(format!(
                "force-field set has {} records, generated has {}",
                ff.len(),
                generated.len()
            )));
        }
        let offenders: Vec<usize> = generated
            .iter()
            .zip(ff)
            .enumerate()
            .filter(|(_, (g, f))| !g.same_graph(f))
            .map(|(i, _)| i)
            .collect();
        if !offenders.is_empty() {
            return Err(Error::Metric(format!(
                "force-field records do not graph-match generated records at indices {offenders:?}"
            )));
        }
        ff_count = Some(ff.len());
        for pattern in &options.patterns {
            let g = angle_hist_binned(generated, pattern, options.angle_bin)?;
            let f = angle_hist_binned(ff, pattern, options.angle_bin)?;
            jsd_angles_vs_ff.push((pattern.text().to_string(), maybe_jsd(&g, &f)));
        }
        let matches = conformer::conformer_match_set(generated, ff, &options.de)?;
        let rmsds: Vec<f64> = matches.iter().map(|m| m.conformer_rmsd).collect();
        conformer_rmsd = SummaryStats::from_values(&rmsds);
    }

    Ok(MetricReport {
        distance_bin: options.distance_bin,
        angle_bin: options.angle_bin,
        generated_count: generated.len(),
        reference_count: reference.len(),
        ff_count,
        jsd_distance_all_atom: maybe_jsd(&gen_all, &ref_all),
        jsd_distance_cc: maybe_jsd(&gen_cc, &ref_cc),
        jsd_angles_vs_reference,
        jsd_angles_vs_ff,
        conformer_rmsd,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "n/a".into(),
    }
}

impl MetricReport {
    /// Tab-separated report.
    pub fn to_tsv(&self, config_fingerprint: &str) -> String {
        let mut out = String::new();
        out.push_str("# confrag eval report v1\n");
        out.push_str(&format!("# config\t{config_fingerprint}\n"));
        out.push_str(&format!(
            "# bins\tdistance={}A angle={}deg jsd=nat\n",
            self.distance_bin, self.angle_bin
        ));
        out.push_str("metric\tvalue\n");
        out.push_str(&format!("generated_count\t{}\n", self.generated_count));
        out.push_str(&format!("reference_count\t{}\n", self.reference_count));
        if let Some(n) = self.ff_count {
            out.push_str(&format!("ff_count\t{n}\n"));
        }
        out.push_str(&format!(
            "jsd_distance_all_atom\t{}\n",
            fmt_opt(self.jsd_distance_all_atom)
        ));
        out.push_str(&format!(
            "jsd_distance_cc\t{}\n",
            fmt_opt(self.jsd_distance_cc)
        ));
        for (pattern, value) in &self.jsd_angles_vs_reference {
            out.push_str(&format!("jsd_angle_ref[{pattern}]\t{}\n", fmt_opt(*value)));
        }
        for (pattern, value) in &self.jsd_angles_vs_ff {
            out.push_str(&format!("jsd_angle_ff[{pattern}]\t{}\n", fmt_opt(*value)));
        }
        if let Some(stats) = &self.conformer_rmsd {
            out.push_str(&format!("conformer_rmsd_count\t{}\n", stats.count));
            out.push_str(&format!("conformer_rmsd_mean\t{:.6}\n", stats.mean));
            out.push_str(&format!("conformer_rmsd_median\t{:.6}\n", stats.median));
            out.push_str(&format!("conformer_rmsd_q1\t{:.6}\n", stats.q1));
            out.push_str(&format!("conformer_rmsd_q3\t{:.6}\n", stats.q3));
        }
        out
    }

    /// Structured key=value report.
    pub fn to_kv(&self, config_fingerprint: &str) -> String {
        let mut out = String::new();
        out.push_str("format=confrag-eval-kv-v1\n");
        out.push_str(&format!("config={config_fingerprint}\n"));
        out.push_str(&format!("bins.distance={}\n", self.distance_bin));
        out.push_str(&format!("bins.angle={}\n", self.angle_bin));
        out.push_str("jsd.log=nat\n");
        out.push_str(&format!("counts.generated={}\n", self.generated_count));
        out.push_str(&format!("counts.reference={}\n", self.reference_count));
        if let Some(n) = self.ff_count {
            out.push_str(&format!("counts.ff={n}\n"));
        }
        out.push_str(&format!(
            "jsd.distance.all_atom={}\n",
            fmt_opt(self.jsd_distance_all_atom)
        ));
        out.push_str(&format!("jsd.distance.cc={}\n", fmt_opt(self.jsd_distance_cc)));
        for (pattern, value) in &self.jsd_angles_vs_reference {
            out.push_str(&format!("jsd.angle.ref.{pattern}={}\n", fmt_opt(*value)));
        }
        for (pattern, value) in &self.jsd_angles_vs_ff {
            out.push_str(&format!("jsd.angle.ff.{pattern}={}\n", fmt_opt(*value)));
        }
        if let Some(stats) = &self.conformer_rmsd {
            out.push_str(&format!("conformer_rmsd.count={}\n", stats.count));
            out.push_str(&format!("conformer_rmsd.mean={:.6}\n", stats.mean));
            out.push_str(&format!("conformer_rmsd.median={:.6}\n", stats.median));
            out.push_str(&format!("conformer_rmsd.q1={:.6}\n", stats.q1));
            out.push_str(&format!("conformer_rmsd.q3={:.6}\n", stats.q3));
        }
        out
    }
}
