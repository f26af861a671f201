//! Result serialization: pretty JSON with every float printed at 17
//! significant digits (the shortest count that round-trips any f64
//! exactly), and flat (row, col, value) CSV for plotting tools.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty printer that only swaps out the float rendering; every layout
/// decision is delegated to the stock pretty formatter.
struct SciPretty<'a>(PrettyFormatter<'a>);

impl Formatter for SciPretty<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            // json has no NaN/inf literal; the stock formatter writes null
            self.0.write_f64(writer, value)
        }
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.0.end_object_value(writer)
    }
}

/// Serializes a document to pretty JSON bytes with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SciPretty(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("document types serialize infallibly");
    out.push(b'\n');
    out
}

/// Appends one matrix as `name,row,col,value` lines.
pub fn push_matrix_triples(out: &mut String, name: &str, rows: &[Vec<f64>]) {
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out.push_str(name);
            out.push(',');
            out.push_str(&i.to_string());
            out.push(',');
            out.push_str(&j.to_string());
            out.push(',');
            out.push_str(&fmt_float(v));
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Doc {
        name: &'static str,
        values: Vec<f64>,
        matrix: Vec<Vec<f64>>,
        count: u64,
        flag: bool,
        missing: Option<f64>,
    }

    #[test]
    fn json_round_trips_floats_exactly() {
        let doc = Doc {
            name: "t",
            values: vec![
                -6.283185962946785,
                1.0,
                0.1,
                f64::MIN_POSITIVE,
                1.7976931348623157e308,
                -0.0,
            ],
            matrix: vec![vec![0.5, 1.0 / 3.0], vec![1.0 / 3.0, 0.25]],
            count: 7,
            flag: true,
            missing: None,
        };
        let bytes = to_json_bytes(&doc);
        let parsed: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        for (i, &want) in doc.values.iter().enumerate() {
            let got = parsed["values"][i].as_f64().unwrap();
            assert_eq!(got.to_bits(), want.to_bits(), "index {i}");
        }
        assert_eq!(parsed["matrix"][0][1].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(parsed["count"].as_u64().unwrap(), 7);
        assert_eq!(parsed["flag"].as_bool().unwrap(), true);
        assert!(parsed["missing"].is_null());
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.ends_with("}\n"));
        assert!(text.contains('\n'), "pretty layout expected");
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.1), "-1.0000000000000001e-1");
        let v: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v.to_bits(), std::f64::consts::PI.to_bits());
    }

    #[test]
    fn non_finite_floats_become_null() {
        let bytes = to_json_bytes(&vec![f64::NAN, f64::INFINITY, 1.0]);
        let parsed: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert!(parsed[0].is_null());
        assert!(parsed[1].is_null());
        assert_eq!(parsed[2].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn csv_triples_layout() {
        let mut s = String::from("matrix,row,col,value\n");
        push_matrix_triples(&mut s, "Q", &[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "Q,0,0,1.0000000000000000e0");
        assert_eq!(lines[4], "Q,1,1,4.0000000000000000e0");
    }
}
