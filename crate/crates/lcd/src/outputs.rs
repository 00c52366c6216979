//! Result files: assignments, dendrograms, Leaders compressions, concept
//! dumps and alignment reports.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lcd_core::alignment::Fraction;
use lcd_core::{
    AlignmentReport, ClusterAssignment, ConceptSet, CoverageDenominator, Dendrogram,
    LeadersCompression, Method, TokenRecord,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment file body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentFile {
    /// Backend name.
    pub method: String,
    /// Declared cluster count.
    pub k: usize,
    /// Seed the run was started from.
    pub seed: u64,
    /// Within-cluster sum of squares.
    pub inertia: f64,
    /// Cluster id per point.
    pub labels: Vec<usize>,
}

impl From<&ClusterAssignment> for AssignmentFile {
    fn from(a: &ClusterAssignment) -> Self {
        AssignmentFile {
            method: a.method.as_str().to_string(),
            k: a.k,
            seed: a.seed,
            inertia: a.inertia,
            labels: a.labels.clone(),
        }
    }
}

impl AssignmentFile {
    /// Validated core assignment.
    pub fn into_assignment(self, path: &Path) -> Result<ClusterAssignment> {
        let method: Method = self
            .method
            .parse()
            .map_err(|e: lcd_core::Error| Error::format(path, e.to_string()))?;
        let a = ClusterAssignment {
            labels: self.labels,
            k: self.k,
            inertia: self.inertia,
            method,
            seed: self.seed,
            iterations_run: 0,
        };
        a.validate().map_err(|e| Error::format(path, e.to_string()))?;
        Ok(a)
    }
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `bytes` to `path`.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads and parses a JSON file.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::format(path, e.to_string()))
}

/// Reads an assignment file.
pub fn read_assignment(path: &Path) -> Result<ClusterAssignment> {
    read_json::<AssignmentFile>(path)?.into_assignment(path)
}

/// One dendrogram line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeLine {
    /// Merge index; the merge creates node `N + step`.
    pub step: usize,
    /// First merged node.
    pub a: usize,
    /// Second merged node.
    pub b: usize,
    /// Ward cost of the merge.
    pub cost: f64,
    /// Points under the new node.
    pub size: usize,
}

/// Dendrogram as JSON lines, one merge per line.
pub fn dendrogram_jsonl(dg: &Dendrogram) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (step, m) in dg.merges.iter().enumerate() {
        let line = MergeLine {
            step,
            a: m.a,
            b: m.b,
            cost: m.cost,
            size: m.size,
        };
        serde_json::to_writer(&mut out, &line).map_err(|e| Error::Internal(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Leaders compression dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionDump {
    /// Radius of the pass.
    pub tau: f64,
    /// Number of leaders.
    pub m: usize,
    /// Seed of the visiting order.
    pub order_seed: u64,
    /// Leader point id per point.
    pub follower_of: Vec<usize>,
}

impl From<&LeadersCompression> for CompressionDump {
    fn from(c: &LeadersCompression) -> Self {
        CompressionDump {
            tau: c.tau,
            m: c.m(),
            order_seed: c.order_seed,
            follower_of: c.follower_of.clone(),
        }
    }
}

/// One concept dump line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptLine {
    /// Cluster id.
    pub concept_id: usize,
    /// Token ids, ascending.
    pub members: Vec<usize>,
}

/// Concepts as JSON lines.
pub fn concepts_jsonl(cs: &ConceptSet) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for c in &cs.concepts {
        let line = ConceptLine {
            concept_id: c.concept_id,
            members: c.member_ids.clone(),
        };
        serde_json::to_writer(&mut out, &line).map_err(|e| Error::Internal(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Reads a concept dump and rebuilds word-type statistics from `tokens`.
pub fn read_concepts(path: &Path, tokens: &[TokenRecord]) -> Result<ConceptSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut groups = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: ConceptLine = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {e}", no + 1)))?;
        groups.push((c.concept_id, c.members));
    }
    ConceptSet::from_members(groups, tokens).map_err(|e| Error::format(path, e.to_string()))
}

/// Human-readable concept listing: id, size, type count and the most
/// frequent surfaces.
pub fn concept_listing(cs: &ConceptSet, top: usize) -> String {
    let mut out = String::new();
    for c in &cs.concepts {
        let words: Vec<String> = c
            .top_types(top)
            .into_iter()
            .map(|(w, n)| format!("{w} ({n})"))
            .collect();
        out.push_str(&format!(
            "concept {:>5}  size {:>7}  types {:>6}  {}\n",
            c.concept_id,
            c.size(),
            c.unique_types(),
            words.join(", ")
        ));
    }
    out
}

/// An exact ratio with its decimal renderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioJson {
    /// Numerator in lowest terms.
    pub num: u64,
    /// Denominator in lowest terms.
    pub den: u64,
    /// Floating-point value.
    pub value: f64,
    /// Percentage, one decimal, ties to even.
    pub percent: String,
}

impl From<&Fraction> for RatioJson {
    fn from(f: &Fraction) -> Self {
        RatioJson {
            num: *f.0.numer(),
            den: *f.0.denom(),
            value: f.to_f64(),
            percent: f.percent_string(),
        }
    }
}

/// Per-label aligned concept count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    /// Ontology label.
    pub label: String,
    /// Aligned concepts for the label.
    pub aligned_concepts: usize,
}

/// Alignment report file body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    /// θ as an exact fraction, e.g. `19/20`.
    pub theta: String,
    /// θ as a float.
    pub theta_value: f64,
    /// Which size divides coverage overlaps.
    pub coverage_denominator: String,
    /// Type filter, `null` when unfiltered.
    pub min_types: Option<usize>,
    /// Encoded concepts scored.
    pub n_concepts: usize,
    /// Human concepts.
    pub n_labels: usize,
    /// Concepts aligned with some label.
    pub aligned_concepts: usize,
    /// Labels covered by some aligned concept.
    pub covered_labels: usize,
    /// Concepts aligned with more than one label.
    pub multi_aligned: usize,
    /// Concept members without a label.
    pub unlabeled_members: usize,
    /// Alignment fraction.
    pub alignment: RatioJson,
    /// Coverage fraction.
    pub coverage: RatioJson,
    /// Mean of alignment and coverage.
    pub lambda: RatioJson,
    /// Aligned concept ids, ascending.
    pub aligned_concept_ids: Vec<usize>,
    /// Covered label names, ascending.
    pub covered_label_names: Vec<String>,
    /// Per-label counts, most aligned first; present with `--breakdown`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<Vec<LabelCount>>,
}

fn denominator_name(d: CoverageDenominator) -> &'static str {
    match d {
        CoverageDenominator::EncodedConcept => "encoded",
        CoverageDenominator::HumanConcept => "human",
    }
}

impl ReportJson {
    /// Builds the file body; `breakdown` adds the per-label table.
    pub fn new(r: &AlignmentReport, breakdown: bool) -> Self {
        let theta = r.options.theta;
        ReportJson {
            theta: format!("{}/{}", theta.numer(), theta.denom()),
            theta_value: theta.to_f64(),
            coverage_denominator: denominator_name(r.options.coverage_denominator).into(),
            min_types: r.min_types,
            n_concepts: r.n_concepts,
            n_labels: r.n_labels,
            aligned_concepts: r.aligned_concept_ids.len(),
            covered_labels: r.covered_labels.len(),
            multi_aligned: r.multi_aligned,
            unlabeled_members: r.unlabeled_members,
            alignment: (&r.alignment).into(),
            coverage: (&r.coverage).into(),
            lambda: (&r.lambda).into(),
            aligned_concept_ids: r.aligned_concept_ids.clone(),
            covered_label_names: r.covered_labels.clone(),
            breakdown: breakdown.then(|| {
                lcd_core::per_label_breakdown(r)
                    .into_iter()
                    .map(|(label, aligned_concepts)| LabelCount {
                        label,
                        aligned_concepts,
                    })
                    .collect()
            }),
        }
    }
}

/// `f` rounded to two decimals, ties to even, computed exactly.
pub fn hundredths_string(f: &Fraction) -> String {
    let (n, d) = (*f.0.numer() as u128, *f.0.denom() as u128);
    let scaled = n * 100;
    let (q, r) = (scaled / d, scaled % d);
    let q = match (2 * r).cmp(&d) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal if q % 2 == 1 => q + 1,
        _ => q,
    };
    format!("{}.{:02}", q / 100, q % 100)
}

/// Aligned-text summary with the columns Align. %, Cov. % and λ.
pub fn report_table(r: &AlignmentReport, method: Option<&str>) -> String {
    let method = method.unwrap_or("-");
    let rows = [
        ["Clustering", "Size", "Align. %", "Cov. %", "λ"].map(String::from),
        [
            method.to_string(),
            r.n_concepts.to_string(),
            r.alignment.percent_string(),
            r.coverage.percent_string(),
            hundredths_string(&r.lambda),
        ],
    ];
    let widths: Vec<usize> = (0..5)
        .map(|c| rows.iter().map(|row| row[c].chars().count()).max().unwrap())
        .collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Per-label breakdown as aligned text.
pub fn breakdown_table(r: &AlignmentReport) -> String {
    let rows = lcd_core::per_label_breakdown(r);
    let w = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<w$}  aligned\n", "label");
    for (label, n) in rows {
        out.push_str(&format!("{label:<w$}  {n:>7}\n"));
    }
    out
}

/// Writes `text` to `path`, creating or truncating it.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
