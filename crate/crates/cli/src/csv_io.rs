//! Result rows as CSV.
//!
//! Floats are written with 17 significant digits, so a parse of the written
//! file reproduces every row bit for bit. SNR-independent rows leave
//! `snr_db` empty.

use std::io::{Read, Write};

use hybeam::experiments::{Metric, ResultRow};

use crate::CliError;

pub const HEADER: [&str; 8] = [
    "scenario",
    "scheme",
    "snr_db",
    "metric",
    "value",
    "stderr",
    "realizations",
    "seed",
];

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let snr = r.snr_db.map(format_f64).unwrap_or_default();
        w.write_record([
            r.scenario.as_str(),
            r.scheme.as_str(),
            snr.as_str(),
            &r.metric.to_string(),
            &format_f64(r.value),
            &format_f64(r.stderr),
            &r.realizations.to_string(),
            &r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[ResultRow]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| CliError::Data(e.to_string()))
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Data(format!(
            "unexpected CSV header {:?}; expected {}",
            header.iter().collect::<Vec<_>>(),
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |field: &str| CliError::Data(format!("line {line}: invalid {field}"));
        let num = |j: usize, field: &str| rec[j].trim().parse::<f64>().map_err(|_| bad(field));
        let snr_db = if rec[2].trim().is_empty() {
            None
        } else {
            Some(num(2, "snr_db")?)
        };
        let stderr = num(5, "stderr")?;
        if stderr.is_nan() || stderr < 0.0 {
            return Err(bad("stderr (must be >= 0)"));
        }
        rows.push(ResultRow {
            scenario: rec[0].to_string(),
            scheme: rec[1].to_string(),
            snr_db,
            metric: rec[3].parse::<Metric>().map_err(|_| bad("metric"))?,
            value: num(4, "value")?,
            stderr,
            realizations: rec[6].trim().parse().map_err(|_| bad("realizations"))?,
            seed: rec[7].trim().parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hybeam::experiments::SinrPart;

    fn sample() -> Vec<ResultRow> {
        let base = ResultRow {
            scenario: "fig2".into(),
            scheme: "rf_ltap+zf".into(),
            snr_db: Some(-10.0),
            metric: Metric::Rate,
            value: 0.1 + 0.2,
            stderr: 1.0 / 3.0,
            realizations: 200,
            seed: u64::MAX,
        };
        vec![
            base.clone(),
            ResultRow {
                snr_db: None,
                metric: Metric::RmsCdfPoint { antennas: 25, prob: 0.1 },
                value: 1e-300,
                stderr: 0.0,
                ..base.clone()
            },
            ResultRow {
                metric: Metric::SinrComponent(SinrPart::Isi),
                value: -std::f64::consts::PI * 1e17,
                ..base
            },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = sample();
        let text = rows_to_string(&rows).unwrap();
        assert!(text.starts_with("scenario,scheme,snr_db,metric,value,stderr,realizations,seed\n"));
        assert_eq!(read_rows(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-10.0), "-1.0000000000000000e1");
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
        let head = HEADER.join(",");
        for body in [
            "x,y,zz,rate,1,0,1,1",
            "x,y,0,nope,1,0,1,1",
            "x,y,0,rate,1,-1,1,1",
            "x,y,0,rate,1,0,-1,1",
            "x,y,0,rate,1,0,1",
        ] {
            let text = format!("{head}\n{body}\n");
            assert!(read_rows(text.as_bytes()).is_err(), "{body}");
        }
    }
}
