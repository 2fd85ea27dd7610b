use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scales::{
    score_mist, score_nmls, score_selfefficacy, score_voi, Instruments, NmlsSubscale, ScaleScores,
    Veracity, MIST_ITEMS, NMLS_ITEMS, SELF_EFFICACY_ITEMS, VOI_ITEMS,
};
use super::wilcoxon::{wilcoxon_signed_rank, Method, WilcoxonResult};
use super::AnalysisError;

/// Below this many non-zero differences no two-sided exact p can reach .05.
pub const SMALL_SAMPLE_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pre,
    Post,
}

/// Raw answers for one participant in one phase. A group is `None` when any
/// of its cells was blank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub participant: String,
    pub phase: Phase,
    pub mist: Option<Vec<Veracity>>,
    pub nmls: Option<Vec<u8>>,
    pub voi: Option<Vec<f64>>,
    pub self_efficacy: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<ResponseRow>,
}

fn columns(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

impl Dataset {
    /// Column names in file order.
    pub fn header() -> Vec<String> {
        let mut h = vec!["participant".to_string(), "phase".to_string()];
        h.extend(columns("mist", MIST_ITEMS));
        h.extend(columns("nmls", NMLS_ITEMS));
        h.extend(columns("voi", VOI_ITEMS));
        h.extend(columns("se", SELF_EFFICACY_ITEMS));
        h
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, AnalysisError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Parses the CSV layout described by [`Dataset::header`]. Columns are
    /// located by name, so their order does not matter. Rows are numbered
    /// by file line, the header being line 1.
    pub fn from_reader(reader: impl Read) -> Result<Self, AnalysisError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| AnalysisError::ParseError { row: 1, reason: e.to_string() })?
            .clone();
        let index: BTreeMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
        for name in Self::header() {
            if !index.contains_key(name.as_str()) {
                return Err(AnalysisError::ParseError { row: 1, reason: format!("missing column `{name}`") });
            }
        }
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let fallback = i + 2;
            let record = record.map_err(|e| AnalysisError::ParseError { row: fallback, reason: e.to_string() })?;
            let row = record.position().map_or(fallback, |p| p.line() as usize);
            let err = |reason: String| AnalysisError::ParseError { row, reason };
            let cell = |name: &str| record.get(index[name]).unwrap_or("");

            let participant = cell("participant").to_string();
            if participant.is_empty() {
                return Err(err("blank participant id".into()));
            }
            let phase = match cell("phase").to_ascii_lowercase().as_str() {
                "pre" => Phase::Pre,
                "post" => Phase::Post,
                other => return Err(err(format!("phase `{other}` is neither pre nor post"))),
            };

            fn group<T>(
                cells: Vec<&str>,
                parse: impl Fn(&str) -> Result<T, String>,
                err: &dyn Fn(String) -> AnalysisError,
            ) -> Result<Option<Vec<T>>, AnalysisError> {
                if cells.iter().any(|c| c.is_empty()) {
                    return Ok(None);
                }
                cells.into_iter().map(|c| parse(c).map_err(err)).collect::<Result<_, _>>().map(Some)
            }
            let cells = |prefix: &str, n: usize| columns(prefix, n).map(|c| cell(&c)).collect::<Vec<_>>();
            let int = |c: &str| c.parse::<u8>().map_err(|_| format!("`{c}` is not a whole-number response"));

            rows.push(ResponseRow {
                participant,
                phase,
                mist: group(cells("mist", MIST_ITEMS), |c| c.parse::<Veracity>(), &err)?,
                nmls: group(cells("nmls", NMLS_ITEMS), int, &err)?,
                voi: group(
                    cells("voi", VOI_ITEMS),
                    |c| c.parse::<f64>().map_err(|_| format!("`{c}` is not a number")),
                    &err,
                )?,
                self_efficacy: group(cells("se", SELF_EFFICACY_ITEMS), int, &err)?,
            });
        }
        Ok(Dataset { rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header()).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![
                r.participant.clone(),
                match r.phase {
                    Phase::Pre => "pre".into(),
                    Phase::Post => "post".into(),
                },
            ];
            fn cells<T>(v: &Option<Vec<T>>, n: usize, f: impl Fn(&T) -> String) -> Vec<String> {
                match v {
                    Some(v) => v.iter().map(f).collect(),
                    None => vec![String::new(); n],
                }
            }
            rec.extend(cells(&r.mist, MIST_ITEMS, |v| match v {
                Veracity::Fake => "fake".into(),
                Veracity::Real => "real".into(),
            }));
            rec.extend(cells(&r.nmls, NMLS_ITEMS, u8::to_string));
            rec.extend(cells(&r.voi, VOI_ITEMS, f64::to_string));
            rec.extend(cells(&r.self_efficacy, SELF_EFFICACY_ITEMS, u8::to_string));
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

fn score_row(row: &ResponseRow, instruments: &Instruments) -> Result<ScaleScores, AnalysisError> {
    Ok(ScaleScores {
        mist: row.mist.as_deref().map(|a| score_mist(a, &instruments.mist_key)).transpose()?,
        nmls: row.nmls.as_deref().map(|r| score_nmls(r, &instruments.nmls_items)).transpose()?,
        voi: row.voi.as_deref().map(score_voi).transpose()?,
        self_efficacy: row.self_efficacy.as_deref().map(score_selfefficacy).transpose()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Voi,
    NmlsTotal,
    Nmls(NmlsSubscale),
    SelfEfficacy,
    Mist,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::Voi,
        Measure::NmlsTotal,
        Measure::Nmls(NmlsSubscale::FunctionalConsuming),
        Measure::Nmls(NmlsSubscale::CriticalConsuming),
        Measure::Nmls(NmlsSubscale::FunctionalProsuming),
        Measure::Nmls(NmlsSubscale::CriticalProsuming),
        Measure::SelfEfficacy,
        Measure::Mist,
    ];

    pub fn label(self) -> String {
        match self {
            Measure::Voi => "voi".into(),
            Measure::NmlsTotal => "nmls_total".into(),
            Measure::Nmls(s) => format!("nmls_{}", s.label()),
            Measure::SelfEfficacy => "self_efficacy".into(),
            Measure::Mist => "mist".into(),
        }
    }

    pub fn value(self, s: &ScaleScores) -> Option<f64> {
        match self {
            Measure::Voi => s.voi,
            Measure::NmlsTotal => s.nmls.as_ref().map(|n| f64::from(n.total)),
            Measure::Nmls(sub) => s.nmls.as_ref().map(|n| f64::from(n.subscales[&sub])),
            Measure::SelfEfficacy => s.self_efficacy,
            Measure::Mist => s.mist.map(f64::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MeasureOutcome {
    Tested(WilcoxonResult),
    NotTestable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub measure: Measure,
    /// Participants with complete pre and post data for this measure.
    pub n: usize,
    pub outcome: MeasureOutcome,
    pub small_sample: bool,
}

impl MeasureRow {
    pub fn result(&self) -> Option<&WilcoxonResult> {
        match &self.outcome {
            MeasureOutcome::Tested(r) => Some(r),
            MeasureOutcome::NotTestable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub participants: usize,
    pub rows: Vec<MeasureRow>,
}

/// Scores every row and runs one signed-rank test per measure, pairing each
/// participant's pre and post rows. A participant contributes to a measure
/// only when both phases are complete for it.
pub fn pre_post_report(dataset: &Dataset, instruments: &Instruments) -> Result<Report, AnalysisError> {
    if dataset.rows.is_empty() {
        return Err(AnalysisError::EmptyDataset);
    }
    let mut by_participant: BTreeMap<&str, [Option<ScaleScores>; 2]> = BTreeMap::new();
    for (i, row) in dataset.rows.iter().enumerate() {
        let line = i + 2;
        let scores = score_row(row, instruments)
            .map_err(|e| AnalysisError::ParseError { row: line, reason: e.to_string() })?;
        let slot = &mut by_participant.entry(&row.participant).or_default()[row.phase as usize];
        if slot.is_some() {
            return Err(AnalysisError::ParseError {
                row: line,
                reason: format!("second {:?} row for participant `{}`", row.phase, row.participant),
            });
        }
        *slot = Some(scores);
    }

    let rows = Measure::ALL
        .iter()
        .map(|&measure| {
            let (pre, post): (Vec<f64>, Vec<f64>) = by_participant
                .values()
                .filter_map(|[pre, post]| {
                    Some((measure.value(pre.as_ref()?)?, measure.value(post.as_ref()?)?))
                })
                .unzip();
            let n = pre.len();
            let outcome = match wilcoxon_signed_rank(&pre, &post) {
                Ok(r) => MeasureOutcome::Tested(r),
                Err(e) => MeasureOutcome::NotTestable { reason: e.to_string() },
            };
            let n_eff = match &outcome {
                MeasureOutcome::Tested(r) => r.n_effective,
                MeasureOutcome::NotTestable { .. } => 0,
            };
            MeasureRow { measure, n, outcome, small_sample: n_eff < SMALL_SAMPLE_N }
        })
        .collect();
    Ok(Report { participants: by_participant.len(), rows })
}

impl Report {
    pub fn row(&self, measure: Measure) -> Option<&MeasureRow> {
        self.rows.iter().find(|r| r.measure == measure)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("Participants: {}\n\n", self.participants);
        out.push_str("| Measure | N | n_eff | W+ | W- | Z | p (two-sided) | Method | Note |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for row in &self.rows {
            let note = note(row);
            match &row.outcome {
                MeasureOutcome::Tested(r) => writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {:.3} | {:.4} | {} | {} |",
                    row.measure.label(),
                    row.n,
                    r.n_effective,
                    r.w_plus,
                    r.w_minus,
                    r.z,
                    r.p_two_sided,
                    method_label(r.method),
                    note
                ),
                MeasureOutcome::NotTestable { .. } => writeln!(
                    out,
                    "| {} | {} | 0 | - | - | - | - | - | {} |",
                    row.measure.label(),
                    row.n,
                    note
                ),
            }
            .expect("write to string");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "measure", "n", "n_effective", "w_plus", "w_minus", "statistic", "z", "p_two_sided", "method",
            "note",
        ])
        .expect("in-memory write");
        for row in &self.rows {
            let note = note(row);
            let rec = match &row.outcome {
                MeasureOutcome::Tested(r) => vec![
                    row.measure.label(),
                    row.n.to_string(),
                    r.n_effective.to_string(),
                    r.w_plus.to_string(),
                    r.w_minus.to_string(),
                    r.statistic.to_string(),
                    r.z.to_string(),
                    r.p_two_sided.to_string(),
                    method_label(r.method).to_string(),
                    note,
                ],
                MeasureOutcome::NotTestable { .. } => {
                    let mut v = vec![row.measure.label(), row.n.to_string(), "0".into()];
                    v.extend(std::iter::repeat_n(String::new(), 6));
                    v.push(note);
                    v
                }
            };
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::NormalApprox => "normal",
    }
}

fn note(row: &MeasureRow) -> String {
    match &row.outcome {
        MeasureOutcome::NotTestable { reason } => reason.clone(),
        MeasureOutcome::Tested(_) if row.small_sample => "N too small".into(),
        MeasureOutcome::Tested(_) => String::new(),
    }
}
