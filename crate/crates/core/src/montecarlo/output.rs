use std::io::Write;

use super::CurvePoint;
use crate::error::Result;

/// Version of the CSV column layout written by [`write_csv`].
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Column order of result CSV files.
pub const CSV_COLUMNS: [&str; 11] = [
    "x",
    "metric",
    "value",
    "ci_halfwidth",
    "receiver",
    "channel_kind",
    "spread",
    "delta_t",
    "delta_f",
    "seed",
    "config_hash",
];

/// Writes one row per point with a header line. Floats use the shortest
/// round-trip representation, so identical points give identical bytes.
pub fn write_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if points.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads points written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CurvePoint>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ScatteringKind;
    use crate::montecarlo::Metric;

    #[test]
    fn csv_round_trip_and_header() {
        let p = CurvePoint {
            x: 20.0,
            metric: Metric::SinrDb,
            value: 12.345678901234567,
            ci_halfwidth: 0.1,
            receiver: "manual:0.00001:0".into(),
            channel_kind: ScatteringKind::Exp,
            spread: 0.2,
            delta_t: 1.4e-5,
            delta_f: 0.0,
            seed: 42,
            config_hash: "0123456789abcdef".into(),
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&p)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert!(text.contains(",sinr_db,") && text.contains(",exp,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![p]);
        let mut empty = Vec::new();
        write_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), CSV_COLUMNS.join(","));
    }
}
