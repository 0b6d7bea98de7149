//! Text encodings shared by the commands.

use midstop::{Mode, PolicyTable, StoppingRegion};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Rounds to 10 significant digits and prints the shortest decimal that
/// reads back as the rounded value.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("scientific notation parses");
    rounded.to_string()
}

pub fn opt_sig10(x: Option<f64>) -> String {
    x.map(sig10).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer flushes");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Writes a header plus rows of already formatted cells.
pub fn csv_table<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer();
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).expect("write to memory");
    }
    finish(w)
}

pub const POLICY_HEADER: [&str; 4] = ["t", "lo", "hi", "value"];

pub fn policy_csv(table: &PolicyTable) -> String {
    csv_table(
        &POLICY_HEADER,
        table.regions().iter().zip(table.values()).map(|(region, &value)| {
            vec![
                region.t.to_string(),
                region.lo.map(|x| x.to_string()).unwrap_or_default(),
                region.hi.map(|x| x.to_string()).unwrap_or_default(),
                sig10(value),
            ]
        }),
    )
}

#[derive(Serialize, Deserialize)]
struct PolicyJson {
    n: usize,
    mode: Mode,
    regions: Vec<StoppingRegion>,
    values: Vec<JsonNumber>,
}

/// A probability serialized with 10 significant digits.
#[derive(Clone, Copy)]
struct JsonNumber(f64);

impl Serialize for JsonNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: serde_json::Number = sig10(self.0).parse().map_err(serde::ser::Error::custom)?;
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(JsonNumber)
    }
}

pub fn policy_json(table: &PolicyTable) -> String {
    let doc = PolicyJson {
        n: table.n(),
        mode: table.mode(),
        regions: table.regions().to_vec(),
        values: table.values().iter().copied().map(JsonNumber).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("policy serializes");
    s.push('\n');
    s
}

pub fn parse_policy_json(text: &str) -> Result<PolicyTable, CliError> {
    let doc: PolicyJson = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let values = doc.values.into_iter().map(|v| v.0).collect();
    Ok(PolicyTable::from_parts(doc.n, doc.mode, doc.regions, values)?)
}

fn parse_cell<T: std::str::FromStr>(cell: &str, what: &str) -> Result<Option<T>, CliError> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|_| CliError::Parse(format!("bad {what} cell {cell:?}")))
}

/// Reads a policy CSV. The file carries no mode, so the caller supplies it.
pub fn parse_policy_csv(text: &str, mode: Mode) -> Result<PolicyTable, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Parse(e.to_string()))?;
    if header.iter().ne(POLICY_HEADER) {
        return Err(CliError::Parse(format!("unexpected header {header:?}")));
    }
    let mut regions = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let t = parse_cell(&record[0], "t")?.ok_or_else(|| CliError::Parse("empty t".into()))?;
        let region = match (parse_cell(&record[1], "lo")?, parse_cell(&record[2], "hi")?) {
            (Some(lo), Some(hi)) => StoppingRegion::interval(t, lo, hi)?,
            (None, None) => StoppingRegion::empty(t),
            _ => return Err(CliError::Parse(format!("round {t} has only one bound"))),
        };
        regions.push(region);
        values.push(parse_cell(&record[3], "value")?.ok_or_else(|| CliError::Parse("empty value".into()))?);
    }
    Ok(PolicyTable::from_parts(regions.len(), mode, regions, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use midstop::policy::backward_induction;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.1), "0.1");
        assert_eq!(sig10(1.0), "1");
        assert_eq!(sig10(0.17732142857142857), "0.1773214286");
        assert_eq!(sig10(0.0079788456080286535), "0.007978845608");
        assert_eq!(sig10(12345678901.0), "12345678900");
        assert_eq!(sig10(sig10(1.0 / 3.0).parse().unwrap()), sig10(1.0 / 3.0));
        assert_eq!(opt_sig10(None), "");
    }

    #[test]
    fn policy_csv_shape() {
        let table = backward_induction(1, Mode::Paper).unwrap();
        assert_eq!(policy_csv(&table), "t,lo,hi,value\n1,1,1,1\n");
        let text = policy_csv(&backward_induction(10, Mode::Paper).unwrap());
        assert!(text.starts_with("t,lo,hi,value\n1,,,0.189"), "{text}");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_identity() {
        for mode in Mode::ALL {
            for n in [1, 2, 10, 57] {
                let text = policy_csv(&backward_induction(n, mode).unwrap());
                let again = policy_csv(&parse_policy_csv(&text, mode).unwrap());
                assert_eq!(text, again);
            }
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        for mode in Mode::ALL {
            for n in [1, 3, 10, 57] {
                let text = policy_json(&backward_induction(n, mode).unwrap());
                let parsed = parse_policy_json(&text).unwrap();
                assert_eq!(parsed.mode(), mode);
                assert_eq!(policy_json(&parsed), text);
            }
        }
    }

    #[test]
    fn json_schema() {
        let text = policy_json(&backward_induction(1, Mode::Exact).unwrap());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 1);
        assert_eq!(v["mode"], "exact");
        assert_eq!(v["regions"][0], serde_json::json!({"t": 1, "lo": 1, "hi": 1}));
        assert_eq!(v["values"][0], 1);
    }

    #[test]
    fn malformed_policies_are_rejected() {
        assert!(parse_policy_csv("t,lo,hi,value\n1,1,,1\n", Mode::Paper).is_err());
        assert!(parse_policy_csv("t,lo,value\n1,1,1\n", Mode::Paper).is_err());
        assert!(parse_policy_csv("t,lo,hi,value\n1,,,1\n", Mode::Paper).is_err());
        assert!(parse_policy_csv("t,lo,hi,value\n1,1,1,1\n2,1,1,0.5\n", Mode::Paper).is_err());
        assert!(parse_policy_json("{\"n\":1}").is_err());
    }
}
