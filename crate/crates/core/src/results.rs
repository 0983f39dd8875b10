//! Per-episode result tables and their CSV form.
//!
//! Columns: `variant, replicate, episode, selected_prior, reward, best_so_far, distance`.
//! `selected_prior` is `init` for random trials, otherwise the model index.

use std::path::Path;

use crate::bo::EpisodeRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "variant",
    "replicate",
    "episode",
    "selected_prior",
    "reward",
    "best_so_far",
    "distance",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub variant: String,
    pub replicate: usize,
    pub episode: usize,
    pub selected_prior: Option<usize>,
    pub reward: f64,
    pub best_so_far: f64,
    /// Distance to target of this episode (`-reward`).
    pub distance: f64,
}

pub fn rows_from_records(
    variant: &str,
    replicate: usize,
    records: &[EpisodeRecord],
) -> Vec<ResultRow> {
    records
        .iter()
        .map(|r| ResultRow {
            variant: variant.to_string(),
            replicate,
            episode: r.episode,
            selected_prior: r.selected_prior,
            reward: r.reward,
            best_so_far: r.best_so_far,
            distance: -r.reward,
        })
        .collect()
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let sel = r
            .selected_prior
            .map_or_else(|| "init".to_string(), |i| i.to_string());
        w.write_record([
            r.variant.clone(),
            r.replicate.to_string(),
            r.episode.to_string(),
            sel,
            r.reward.to_string(),
            r.best_so_far.to_string(),
            r.distance.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::parse(
            1,
            format!("expected header {}", CSV_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len()),
            ));
        }
        let int = |k: usize| {
            rec[k]
                .parse::<usize>()
                .map_err(|e| Error::parse(line, format!("{}: {e}", CSV_HEADER[k])))
        };
        let real = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::parse(line, format!("{}: {e}", CSV_HEADER[k])))
        };
        let selected_prior = match &rec[3] {
            "init" => None,
            s => Some(
                s.parse::<usize>()
                    .map_err(|e| Error::parse(line, format!("selected_prior: {e}")))?,
            ),
        };
        rows.push(ResultRow {
            variant: rec[0].to_string(),
            replicate: int(1)?,
            episode: int(2)?,
            selected_prior,
            reward: real(4)?,
            best_so_far: real(5)?,
            distance: real(6)?,
        });
    }
    Ok(rows)
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    crate::io::write_atomic(path.as_ref(), to_csv_string(rows)?.as_bytes())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row_strategy() -> impl Strategy<Value = ResultRow> {
        (
            "[a-z_]{1,8}",
            0usize..40,
            1usize..30,
            proptest::option::of(0usize..10),
            -1e6f64..0.0,
            -1e6f64..0.0,
        )
            .prop_map(
                |(variant, replicate, episode, selected_prior, reward, best)| ResultRow {
                    variant,
                    replicate,
                    episode,
                    selected_prior,
                    reward,
                    best_so_far: best,
                    distance: -reward,
                },
            )
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in proptest::collection::vec(row_strategy(), 0..20)) {
            let text = to_csv_string(&rows).unwrap();
            prop_assert_eq!(parse_csv(&text).unwrap(), rows);
        }
    }

    #[test]
    fn header_is_mandatory() {
        assert!(parse_csv("mlei,0,1,init,-1,-1,1\n").is_err());
        let ok = "variant,replicate,episode,selected_prior,reward,best_so_far,distance\nmlei,0,1,init,-1,-1,1\n";
        assert_eq!(parse_csv(ok).unwrap().len(), 1);
        let bad = "variant,replicate,episode,selected_prior,reward,best_so_far,distance\nmlei,0,1,x,-1,-1,1\n";
        assert!(matches!(parse_csv(bad), Err(Error::Parse { line: 2, .. })));
    }
}
