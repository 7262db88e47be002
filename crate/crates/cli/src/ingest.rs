//! CSV ingestion and the canonical stacked writer.
//!
//! Stacked files hold a whole collection, one measurement per row:
//! `entity_id,time,component,value`. Wide files hold one entity: a `time`
//! column followed by one column per component; the entity id is the file
//! stem. In both layouts time is a non-negative integer index, the span of an
//! entity runs from its first to its last time, and every cell missing in that
//! span becomes 0.0 with a warning.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use mdsts_core::{MultiSeries, Series};

use crate::error::{io_error, CliError};

/// Spans longer than this are rejected rather than padded.
const MAX_SPAN: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Layout {
    Stacked,
    Wide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub entities: Vec<MultiSeries>,
    pub warnings: Vec<String>,
}

pub fn ingest(path: &Path, layout: Layout) -> Result<Ingested, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let origin = path.display().to_string();
    let ingested = match layout {
        Layout::Stacked => parse_stacked(&text, &origin)?,
        Layout::Wide => {
            let id = path.file_stem().map_or_else(|| "entity".to_owned(), |s| s.to_string_lossy().into_owned());
            parse_wide(&text, &origin, &id)?
        }
    };
    for w in &ingested.warnings {
        log::warn!("{w}");
    }
    Ok(ingested)
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes())
}

fn data_error(origin: &str, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{origin}:{line}: {msg}"))
}

fn parse_time(origin: &str, line: u64, cell: &str) -> Result<u64, CliError> {
    cell.parse().map_err(|_| data_error(origin, line, format!("time `{cell}` is not a non-negative integer")))
}

fn parse_value(origin: &str, line: u64, cell: &str) -> Result<f64, CliError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(data_error(origin, line, format!("value `{cell}` is not a finite number"))),
    }
}

#[derive(Default)]
struct EntityCells {
    components: Vec<String>,
    cells: HashMap<(u64, usize), f64>,
    min_time: u64,
    max_time: u64,
}

pub fn parse_stacked(text: &str, origin: &str) -> Result<Ingested, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| data_error(origin, 1, e))?.clone();
    let expected = ["entity_id", "time", "component", "value"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(data_error(origin, 1, format!("expected header `{}`", expected.join(","))));
    }

    let mut order: Vec<String> = Vec::new();
    let mut entities: HashMap<String, EntityCells> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_error(origin, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let (id, comp) = (&record[0], &record[2]);
        if id.is_empty() || comp.is_empty() {
            return Err(data_error(origin, line, "empty entity_id or component"));
        }
        let time = parse_time(origin, line, &record[1])?;
        let value = parse_value(origin, line, &record[3])?;

        let e = entities.entry(id.to_owned()).or_insert_with(|| {
            order.push(id.to_owned());
            EntityCells { min_time: time, max_time: time, ..EntityCells::default() }
        });
        let c = match e.components.iter().position(|c| c == comp) {
            Some(c) => c,
            None => {
                e.components.push(comp.to_owned());
                e.components.len() - 1
            }
        };
        if e.cells.insert((time, c), value).is_some() {
            return Err(data_error(origin, line, format!("duplicate measurement for ({id}, {time}, {comp})")));
        }
        e.min_time = e.min_time.min(time);
        e.max_time = e.max_time.max(time);
    }
    if order.is_empty() {
        return Err(CliError::Data(format!("{origin}: no measurements")));
    }

    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let e = &entities[&id];
        let span = e.max_time - e.min_time + 1;
        if span > MAX_SPAN {
            return Err(CliError::Data(format!("{origin}: entity `{id}` spans {span} time steps")));
        }
        let mut missing = 0usize;
        let components = e
            .components
            .iter()
            .enumerate()
            .map(|(c, label)| {
                let values = (e.min_time..=e.max_time)
                    .map(|t| {
                        e.cells.get(&(t, c)).copied().unwrap_or_else(|| {
                            missing += 1;
                            0.0
                        })
                    })
                    .collect();
                Series::new(label.clone(), values)
            })
            .collect::<mdsts_core::Result<Vec<_>>>()
            .map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
        if missing > 0 {
            warnings.push(format!("{origin}: entity `{id}`: {missing} missing cells set to 0.0"));
        }
        out.push(MultiSeries::new(id, components).map_err(|e| CliError::Data(format!("{origin}: {e}")))?);
    }
    Ok(Ingested { entities: out, warnings })
}

pub fn parse_wide(text: &str, origin: &str, entity_id: &str) -> Result<Ingested, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| data_error(origin, 1, e))?.clone();
    if headers.get(0) != Some("time") || headers.len() < 2 {
        return Err(data_error(origin, 1, "expected header `time,<component>,...`"));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();

    let mut rows: BTreeMap<u64, Vec<Option<f64>>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_error(origin, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(data_error(origin, line, format!("expected {} cells, found {}", headers.len(), record.len())));
        }
        let time = parse_time(origin, line, &record[0])?;
        let cells = record
            .iter()
            .skip(1)
            .map(|cell| if cell.is_empty() { Ok(None) } else { parse_value(origin, line, cell).map(Some) })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.insert(time, cells).is_some() {
            return Err(data_error(origin, line, format!("duplicate time {time}")));
        }
    }
    let (Some((&first, _)), Some((&last, _))) = (rows.first_key_value(), rows.last_key_value()) else {
        return Err(CliError::Data(format!("{origin}: no measurements")));
    };
    if last - first + 1 > MAX_SPAN {
        return Err(CliError::Data(format!("{origin}: spans {} time steps", last - first + 1)));
    }

    let mut missing = 0usize;
    let mut columns = vec![Vec::new(); labels.len()];
    for t in first..=last {
        let row = rows.get(&t);
        for (c, col) in columns.iter_mut().enumerate() {
            col.push(row.and_then(|r| r[c]).unwrap_or_else(|| {
                missing += 1;
                0.0
            }));
        }
    }
    let mut warnings = Vec::new();
    if missing > 0 {
        warnings.push(format!("{origin}: entity `{entity_id}`: {missing} missing cells set to 0.0"));
    }
    let components = labels
        .into_iter()
        .zip(columns)
        .map(|(l, v)| Series::new(l, v))
        .collect::<mdsts_core::Result<Vec<_>>>()
            .map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
    let multi = MultiSeries::new(entity_id, components).map_err(|e| CliError::Data(format!("{origin}: {e}")))?;
    Ok(Ingested { entities: vec![multi], warnings })
}

/// Stacked CSV for a collection; values use the shortest exact decimal form.
pub fn stacked_csv(entities: &[MultiSeries]) -> String {
    let mut out = String::from("entity_id,time,component,value\n");
    for m in entities {
        for t in 0..m.len() {
            for c in m.components() {
                out.push_str(&format!("{},{t},{},{}\n", csv_cell(m.entity_id()), csv_cell(c.label()), c.values()[t]));
            }
        }
    }
    out
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_file() {
        let text = "time,tv,radio,press\n0,1,2,3\n1,4,5,6\n2,7,8,9\n3,1,1,1\n";
        let got = parse_wide(text, "w.csv", "brand").unwrap();
        assert!(got.warnings.is_empty());
        let m = &got.entities[0];
        assert_eq!((m.entity_id(), m.dimension(), m.len()), ("brand", 3, 4));
        assert_eq!(m.components()[1].values(), &[2.0, 5.0, 8.0, 1.0]);
    }

    #[test]
    fn wide_rows_are_sorted_and_gaps_padded() {
        let text = "time,a,b\n2,5,\n0,1,2\n";
        let got = parse_wide(text, "w.csv", "x").unwrap();
        let m = &got.entities[0];
        assert_eq!(m.components()[0].values(), &[1.0, 0.0, 5.0]);
        assert_eq!(m.components()[1].values(), &[2.0, 0.0, 0.0]);
        assert_eq!(got.warnings.len(), 1);
        assert!(got.warnings[0].contains("3 missing"));
    }

    #[test]
    fn stacked_missing_row_becomes_zero() {
        let text = "entity_id,time,component,value\n\
                    b1,0,tv,1.5\nb1,0,radio,2\nb1,1,tv,3\nb1,2,tv,4\nb1,2,radio,5\n";
        let got = parse_stacked(text, "s.csv").unwrap();
        let m = &got.entities[0];
        assert_eq!(m.labels(), vec!["tv", "radio"]);
        assert_eq!(m.components()[1].values(), &[2.0, 0.0, 5.0]);
        assert_eq!(got.warnings, vec!["s.csv: entity `b1`: 1 missing cells set to 0.0".to_owned()]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "entity_id,time,component,value\na,0,x,1\na,1,x,abc\n";
        let e = parse_stacked(bad, "s.csv").unwrap_err();
        assert!(matches!(e, CliError::Data(_)));
        assert!(e.to_string().starts_with("s.csv:3:"), "{e}");

        let dup = "entity_id,time,component,value\na,0,x,1\na,0,y,1\na,0,x,2\n";
        let e = parse_stacked(dup, "s.csv").unwrap_err().to_string();
        assert!(e.contains("s.csv:4") && e.contains("duplicate"), "{e}");

        assert!(parse_stacked("entity,time,component,value\n", "s.csv").is_err());
        assert!(parse_stacked("entity_id,time,component,value\na,-1,x,1\n", "s.csv").is_err());
        assert!(parse_stacked("entity_id,time,component,value\na,0,x,inf\n", "s.csv").is_err());
        assert!(parse_wide("time,a\n0,1\n0,2\n", "w.csv", "x").unwrap_err().to_string().contains("w.csv:3"));
    }

    #[test]
    fn single_component_is_a_data_error() {
        let e = parse_stacked("entity_id,time,component,value\na,0,x,1\n", "s.csv").unwrap_err();
        assert!(matches!(e, CliError::Data(_)), "{e:?}");
    }

    #[test]
    fn writer_quotes_awkward_labels() {
        let m = MultiSeries::new(
            "a,b",
            vec![Series::new("x\"y", vec![0.1, 2.0]).unwrap(), Series::new("z", vec![1e-300, -3.5]).unwrap()],
        )
        .unwrap();
        let text = stacked_csv(std::slice::from_ref(&m));
        assert_eq!(parse_stacked(&text, "s").unwrap().entities, vec![m]);
    }
}
