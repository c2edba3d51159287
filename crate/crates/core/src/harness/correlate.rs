//! Agreement between objective scores and subjective ratings.

use std::collections::HashMap;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
}

/// Pearson and Spearman correlation over labels present in both tables.
///
/// Pairs follow the order of `scores`. Tied values get their average rank.
pub fn correlate(scores: &[(String, f64)], mos: &[(String, f64)]) -> Result<Correlation> {
    let lookup = unique_labels(mos, "mos")?;
    unique_labels(scores, "scores")?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = scores
        .iter()
        .filter_map(|(label, v)| lookup.get(label.as_str()).map(|&m| (*v, m)))
        .unzip();
    let n = xs.len();
    if n < 3 {
        return Err(Error::Undefined(format!("need at least 3 shared labels, found {n}")));
    }
    if let Some((label, _)) = scores.iter().chain(mos).find(|(_, v)| !v.is_finite()) {
        return Err(Error::Undefined(format!("non-finite value for `{label}`")));
    }
    let linear = pearson(&xs, &ys)?;
    let rank = pearson(&average_ranks(&xs), &average_ranks(&ys))?;
    Ok(Correlation {
        pearson: linear,
        spearman: rank,
        n,
    })
}

fn unique_labels<'a>(table: &'a [(String, f64)], name: &str) -> Result<HashMap<&'a str, f64>> {
    let mut map = HashMap::with_capacity(table.len());
    for (label, v) in table {
        if map.insert(label.as_str(), *v).is_some() {
            return Err(Error::InvalidConfig(format!("duplicate label `{label}` in {name}")));
        }
    }
    Ok(map)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("zero variance in one of the inputs".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks, ties sharing the mean of the ranks they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Reads a `(label, value)` table from CSV. A first row whose value does not
/// parse as a number is taken as a header.
pub fn read_label_table<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, record) in csv.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "row {} needs a label and a value",
                line + 1
            )));
        }
        match record[1].parse::<f64>() {
            Ok(v) => out.push((record[0].to_string(), v)),
            Err(_) if line == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidConfig(format!(
                    "row {}: `{}` is not a number",
                    line + 1,
                    &record[1]
                )))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[f64]) -> Vec<(String, f64)> {
        values.iter().enumerate().map(|(i, &v)| (format!("v{i}"), v)).collect()
    }

    /// Textbook formulas with ranks counted directly.
    fn oracle(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        fn r(xs: &[f64], ys: &[f64]) -> f64 {
            let n = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| a * b).sum();
            let sxx: f64 = xs.iter().map(|a| a * a).sum();
            let syy: f64 = ys.iter().map(|b| b * b).sum();
            (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
        }
        fn rank(v: &[f64]) -> Vec<f64> {
            v.iter()
                .map(|&x| {
                    let below = v.iter().filter(|&&y| y < x).count() as f64;
                    let equal = v.iter().filter(|&&y| y == x).count() as f64;
                    below + (equal + 1.0) / 2.0
                })
                .collect()
        }
        (r(xs, ys), r(&rank(xs), &rank(ys)))
    }

    #[test]
    fn identical_and_negated() {
        let a = table(&[1.0, 3.0, 2.0, 5.0]);
        let c = correlate(&a, &a).unwrap();
        assert!((c.pearson - 1.0).abs() < 1e-12 && (c.spearman - 1.0).abs() < 1e-12 && c.n == 4);
        let neg = table(&[-1.0, -3.0, -2.0, -5.0]);
        let c = correlate(&a, &neg).unwrap();
        assert!((c.pearson + 1.0).abs() < 1e-12 && (c.spearman + 1.0).abs() < 1e-12);
    }

    #[test]
    fn five_point_sets_match_oracles() {
        // Frozen from scipy.stats.pearsonr / spearmanr.
        let cases = [
            (
                [3.1, 4.7, 2.2, 5.0, 3.9],
                [2.8, 4.1, 2.9, 4.6, 3.0],
                0.8657504186922029,
                0.8999999999999998,
            ),
            (
                [1.0, 2.0, 2.0, 3.0, 5.0],
                [2.0, 1.0, 4.0, 4.0, 6.5],
                0.8547960742202876,
                0.7631578947368421,
            ),
        ];
        for (xs, ys, p, s) in cases {
            let c = correlate(&table(&xs), &table(&ys)).unwrap();
            let (op, os) = oracle(&xs, &ys);
            assert!((c.pearson - p).abs() < 1e-9 && (c.pearson - op).abs() < 1e-9);
            assert!((c.spearman - s).abs() < 1e-9 && (c.spearman - os).abs() < 1e-9);
        }
    }

    #[test]
    fn joins_on_labels() {
        let scores = vec![
            ("a".to_string(), 1.0),
            ("b".into(), 2.0),
            ("z".into(), 9.0),
            ("c".into(), 3.0),
        ];
        let mos = vec![("c".to_string(), 30.0), ("a".into(), 10.0), ("b".into(), 20.0)];
        let c = correlate(&scores, &mos).unwrap();
        assert_eq!(c.n, 3);
        assert!((c.pearson - 1.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_inputs() {
        let a = table(&[1.0, 2.0]);
        assert!(matches!(correlate(&a, &a), Err(Error::Undefined(_))));
        let flat = table(&[2.0, 2.0, 2.0]);
        assert!(matches!(
            correlate(&flat, &table(&[1.0, 2.0, 3.0])),
            Err(Error::Undefined(_))
        ));
        let dup = vec![("a".to_string(), 1.0), ("a".into(), 2.0), ("b".into(), 3.0)];
        assert!(correlate(&dup, &dup).is_err());
    }

    #[test]
    fn reads_tables_with_optional_header() {
        let t = read_label_table("label,mos\nbus,3.5\nstefan , 2\n".as_bytes()).unwrap();
        assert_eq!(t, vec![("bus".to_string(), 3.5), ("stefan".to_string(), 2.0)]);
        assert_eq!(read_label_table("a,1\nb,2\n".as_bytes()).unwrap().len(), 2);
        assert!(read_label_table("a,1\nb,x\n".as_bytes()).is_err());
    }
}
