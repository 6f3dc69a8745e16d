//! Parsers for real-world AS-relationship snapshots (CAIDA as-rel text)
//! and AS taxonomy lists, producing annotated graphs comparable with
//! generated ones.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotatedGraph, GraphError, LinkKind, NodeClass, NodeId};

pub type AsNumber = u32;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: pair {a}|{b} repeats with a different relationship")]
    ConflictingDuplicate { line: usize, a: AsNumber, b: AsNumber },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiblingPolicy {
    /// Map sibling records (code 2) to p2p links, the closest structural
    /// analogue.
    AsP2p,
    /// Skip sibling records entirely.
    Drop,
}

/// Declares which endpoint is the provider for the directed codes and how
/// to treat siblings. Relationship-code conventions drifted across CAIDA
/// serials, so this is configuration rather than a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMap {
    /// Code -1: first field is the provider (the 2007-era convention).
    /// Code 1 mirrors it.
    pub provider_first_on_minus_one: bool,
    pub sibling_policy: SiblingPolicy,
}

impl Default for CodeMap {
    fn default() -> Self {
        CodeMap {
            provider_first_on_minus_one: true,
            sibling_policy: SiblingPolicy::AsP2p,
        }
    }
}

/// One as-rel record after code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsRelRecord {
    pub a: AsNumber,
    pub b: AsNumber,
    pub kind: LinkKind,
    /// The customer endpoint for c2p records.
    pub customer: Option<AsNumber>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    /// Identical records dropped, first occurrence kept.
    pub duplicate_links: usize,
    pub dropped_siblings: usize,
    pub warnings: Vec<String>,
}

/// Parsed snapshot: the graph plus the AS-number mapping for its dense
/// node ids.
#[derive(Debug, Clone)]
pub struct IngestedGraph {
    pub graph: AnnotatedGraph,
    /// AS number of each node id, in arrival (first appearance) order.
    pub asns: Vec<AsNumber>,
    pub index: HashMap<AsNumber, NodeId>,
    pub report: IngestReport,
}

fn signature(rec: &AsRelRecord) -> (LinkKind, Option<AsNumber>) {
    (rec.kind, rec.customer)
}

/// Reads `A|B|code` lines into mapped records. `#` comments and blank
/// lines are skipped; duplicate pairs keep the first record and conflicts
/// (same pair, different relationship) are errors.
pub fn parse_records<R: BufRead>(
    reader: R,
    code_map: &CodeMap,
) -> Result<(Vec<AsRelRecord>, IngestReport), IngestError> {
    let mut records = Vec::new();
    let mut seen: HashMap<(AsNumber, AsNumber), (LinkKind, Option<AsNumber>)> = HashMap::new();
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('|');
        let a: AsNumber = parse_field(fields.next(), line_no, "AS number")?;
        let b: AsNumber = parse_field(fields.next(), line_no, "AS number")?;
        let code: i32 = parse_field(fields.next(), line_no, "relationship code")?;
        if a == b {
            return Err(IngestError::MalformedLine {
                line: line_no,
                reason: format!("self-loop on AS {a}"),
            });
        }
        let record = match code {
            0 => AsRelRecord {
                a,
                b,
                kind: LinkKind::P2p,
                customer: None,
            },
            -1 | 1 => {
                // code -1 orients one way, code 1 the other
                let first_is_provider = (code == -1) == code_map.provider_first_on_minus_one;
                let customer = if first_is_provider { b } else { a };
                AsRelRecord {
                    a,
                    b,
                    kind: LinkKind::C2p,
                    customer: Some(customer),
                }
            }
            2 => match code_map.sibling_policy {
                SiblingPolicy::Drop => {
                    report.dropped_siblings += 1;
                    continue;
                }
                SiblingPolicy::AsP2p => AsRelRecord {
                    a,
                    b,
                    kind: LinkKind::P2p,
                    customer: None,
                },
            },
            other => {
                return Err(IngestError::MalformedLine {
                    line: line_no,
                    reason: format!("unknown relationship code {other}"),
                })
            }
        };

        let key = if a < b { (a, b) } else { (b, a) };
        match seen.get(&key) {
            Some(sig) if *sig == signature(&record) => {
                report.duplicate_links += 1;
            }
            Some(_) => {
                return Err(IngestError::ConflictingDuplicate { line: line_no, a, b });
            }
            None => {
                seen.insert(key, signature(&record));
                records.push(record);
            }
        }
    }
    Ok((records, report))
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, IngestError> {
    let raw = field.ok_or_else(|| IngestError::MalformedLine {
        line,
        reason: format!("missing {what}"),
    })?;
    raw.trim().parse().map_err(|_| IngestError::MalformedLine {
        line,
        reason: format!("bad {what} {raw:?}"),
    })
}

/// Builds an annotated graph from an as-rel stream. Node classes default
/// to ISP for any AS that has customers or peers, non-ISP otherwise;
/// a taxonomy can overwrite them afterwards.
pub fn parse_as_rel<R: BufRead>(
    reader: R,
    code_map: &CodeMap,
) -> Result<IngestedGraph, IngestError> {
    let (records, report) = parse_records(reader, code_map)?;
    build_graph(&records, report)
}

pub fn build_graph(
    records: &[AsRelRecord],
    report: IngestReport,
) -> Result<IngestedGraph, IngestError> {
    // first pass: arrival order and class inference
    let mut index: HashMap<AsNumber, NodeId> = HashMap::new();
    let mut asns: Vec<AsNumber> = Vec::new();
    let mut is_isp: Vec<bool> = Vec::new();
    let intern = |asn: AsNumber,
                      asns: &mut Vec<AsNumber>,
                      is_isp: &mut Vec<bool>,
                      index: &mut HashMap<AsNumber, NodeId>| {
        *index.entry(asn).or_insert_with(|| {
            asns.push(asn);
            is_isp.push(false);
            asns.len() - 1
        })
    };
    for rec in records {
        let ia = intern(rec.a, &mut asns, &mut is_isp, &mut index);
        let ib = intern(rec.b, &mut asns, &mut is_isp, &mut index);
        match rec.kind {
            LinkKind::P2p => {
                is_isp[ia] = true;
                is_isp[ib] = true;
            }
            LinkKind::C2p => {
                let provider = if rec.customer == Some(rec.a) { ib } else { ia };
                is_isp[provider] = true;
            }
        }
    }

    let mut graph = AnnotatedGraph::new();
    for &isp in &is_isp {
        graph.add_node(if isp { NodeClass::Isp } else { NodeClass::NonIsp });
    }
    for rec in records {
        let ia = index[&rec.a];
        let ib = index[&rec.b];
        let customer = rec.customer.map(|c| index[&c]);
        graph.add_link(ia, ib, rec.kind, customer)?;
    }
    Ok(IngestedGraph {
        graph,
        asns,
        index,
        report,
    })
}

/// AS-number to ISP-or-not mapping collapsed from a taxonomy list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaxonomyRecord {
    pub as_number: AsNumber,
    pub is_isp: bool,
}

pub const DEFAULT_ISP_LABELS: [&str; 5] = ["t1", "t2", "tier1", "tier2", "isp"];

/// Parses delimited `AS label` lines (separator: `|`, comma, or
/// whitespace). A label in `isp_labels` (case-insensitive) marks an ISP.
/// Duplicate AS numbers are last-wins with a warning.
pub fn parse_taxonomy<R: BufRead>(
    reader: R,
    isp_labels: &[&str],
) -> Result<(HashMap<AsNumber, bool>, Vec<String>), IngestError> {
    let mut map = HashMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(|ch: char| ch == '|' || ch == ',' || ch.is_whitespace());
        let asn: AsNumber = parse_field(parts.next(), line_no, "AS number")?;
        let label = parts
            .find(|p| !p.is_empty())
            .ok_or_else(|| IngestError::MalformedLine {
                line: line_no,
                reason: "missing class label".into(),
            })?;
        let is_isp = isp_labels
            .iter()
            .any(|l| l.eq_ignore_ascii_case(label.trim()));
        if map.insert(asn, is_isp).is_some() {
            warnings.push(format!("line {line_no}: duplicate taxonomy entry for AS {asn}"));
        }
    }
    Ok((map, warnings))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered: usize,
    pub uncovered: usize,
    pub isps: usize,
    pub non_isps: usize,
    /// Empirical non-ISP to ISP ratio; the measured rho.
    pub rho: f64,
    pub consistency_warnings: Vec<String>,
}

/// Overwrites node classes where the taxonomy covers them and reports the
/// resulting class split. Non-ISP labels on nodes that act as providers
/// or peers are kept but flagged, since measured data is noisy.
pub fn apply_taxonomy(
    ingested: &mut IngestedGraph,
    taxonomy: &HashMap<AsNumber, bool>,
) -> CoverageReport {
    let mut covered = 0;
    for id in 0..ingested.asns.len() {
        if let Some(&is_isp) = taxonomy.get(&ingested.asns[id]) {
            covered += 1;
            let class = if is_isp { NodeClass::Isp } else { NodeClass::NonIsp };
            ingested.graph.set_class(id, class).expect("node exists");
        }
    }
    let consistency_warnings = ingested.graph.validate_lenient().unwrap_or_default();
    let isps = ingested.graph.class_count(NodeClass::Isp);
    let non_isps = ingested.graph.class_count(NodeClass::NonIsp);
    CoverageReport {
        covered,
        uncovered: ingested.asns.len() - covered,
        isps,
        non_isps,
        rho: if isps > 0 {
            non_isps as f64 / isps as f64
        } else {
            f64::NAN
        },
        consistency_warnings,
    }
}
