//! Time-domain reduction: clusters the days of a year of hourly series into
//! weighted representative days.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::io::{self, DataError, SeriesTable, DAYS_PER_YEAR, HOURS_PER_YEAR};

pub const HOURS_PER_DAY: usize = 24;
pub const DEFAULT_PERIODS: usize = 50;
const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Error)]
pub enum TdrError {
    #[error("k must be between 1 and {days}, got {k}")]
    InvalidK { k: usize, days: usize },
    #[error("series `{name}` has {len} values, expected {expected}")]
    Length { name: String, len: usize, expected: usize },
    #[error("no series to reduce")]
    Empty,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Named groups of hourly series (for instance one group per carrier with
/// one column per zone) that are clustered together.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesBundle {
    pub groups: Vec<(String, SeriesTable)>,
}

impl SeriesBundle {
    pub fn push(&mut self, group: impl Into<String>, table: SeriesTable) {
        self.groups.push((group.into(), table));
    }

    fn flat(&self) -> impl Iterator<Item = (String, &[f64])> {
        self.groups.iter().flat_map(|(g, t)| {
            t.columns.iter().zip(&t.values).map(move |(c, v)| (format!("{g}/{c}"), v.as_slice()))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativePeriod {
    pub period_id: usize,
    /// Number of calendar days the period stands for.
    pub weight: u32,
    /// Calendar day (0-based) chosen as the medoid.
    pub source_day: usize,
    /// `slices[s]` is the rescaled 24-hour vector of flattened series `s`.
    pub slices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Group and column of each flattened series, in bundle order.
    pub series: Vec<(String, String)>,
    pub periods: Vec<RepresentativePeriod>,
    /// Period index of every calendar day.
    pub day_map: Vec<usize>,
    /// Factor applied to each flattened series after medoid selection.
    pub scale: Vec<f64>,
    /// Within-cluster sum of squares after every k-means iteration.
    pub sse_history: Vec<f64>,
}

impl Reduction {
    pub fn series_index(&self, group: &str, column: &str) -> Option<usize> {
        self.series.iter().position(|(g, c)| g == group && c == column)
    }

    pub fn slice(&self, group: &str, column: &str, period: usize) -> Option<&[f64]> {
        self.series_index(group, column).map(|s| self.periods[period].slices[s].as_slice())
    }

    pub fn total_weight(&self) -> u32 {
        self.periods.iter().map(|p| p.weight).sum()
    }

    /// Weighted annual total of flattened series `s`.
    pub fn weighted_total(&self, s: usize) -> f64 {
        self.periods.iter().map(|p| p.weight as f64 * p.slices[s].iter().sum::<f64>()).sum()
    }

    /// Expands the reduction back to 8760 hours through the day map.
    pub fn reconstruct(&self, s: usize) -> Vec<f64> {
        self.day_map.iter().flat_map(|&p| self.periods[p].slices[s].iter().copied()).collect()
    }

    /// Writes `periods.csv`, `day_map.csv` and `series_<group>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), DataError> {
        let path = dir.join("periods.csv");
        let mut w = io::csv_writer(&path)?;
        let err = io::csv_error(&path);
        w.write_record(["period_id", "weight", "source_day"]).map_err(&err)?;
        for p in &self.periods {
            w.write_record([p.period_id.to_string(), p.weight.to_string(), p.source_day.to_string()]).map_err(&err)?;
        }
        w.flush().map_err(io::io_error(&path))?;

        let path = dir.join("day_map.csv");
        let mut w = io::csv_writer(&path)?;
        let err = io::csv_error(&path);
        w.write_record(["day", "period_id"]).map_err(&err)?;
        for (d, p) in self.day_map.iter().enumerate() {
            w.write_record([d.to_string(), p.to_string()]).map_err(&err)?;
        }
        w.flush().map_err(io::io_error(&path))?;

        let mut groups: Vec<&str> = Vec::new();
        for (g, _) in &self.series {
            if !groups.contains(&g.as_str()) {
                groups.push(g);
            }
        }
        for g in groups {
            let idx: Vec<usize> = (0..self.series.len()).filter(|&s| self.series[s].0 == g).collect();
            let path = dir.join(format!("series_{g}.csv"));
            let mut w = io::csv_writer(&path)?;
            let err = io::csv_error(&path);
            let mut header = vec!["period_id".to_string(), "hour".to_string()];
            header.extend(idx.iter().map(|&s| self.series[s].1.clone()));
            w.write_record(&header).map_err(&err)?;
            for p in &self.periods {
                for h in 0..HOURS_PER_DAY {
                    let mut rec = vec![p.period_id.to_string(), h.to_string()];
                    rec.extend(idx.iter().map(|&s| p.slices[s][h].to_string()));
                    w.write_record(&rec).map_err(&err)?;
                }
            }
            w.flush().map_err(io::io_error(&path))?;
        }
        Ok(())
    }
}

/// Result of clustering a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(point, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding followed by Lloyd iterations until assignments are
/// stable. A point only changes cluster when another centroid is strictly
/// closer. An emptied cluster is re-seeded with the point farthest from its
/// own centroid (lowest index on ties) among clusters with two or more
/// members.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Clustering {
    let n = points.len();
    assert!(k >= 1 && k <= n, "k must be in 1..=n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total has a positive entry")
        } else {
            // Only duplicates remain.
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    let mut centroids: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut assignment: Vec<usize> = points.par_iter().map(|p| nearest(p, &centroids).0).collect();
    let mut sse_history = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        fill_empty_clusters(points, &centroids, &mut assignment, k);
        centroids = compute_centroids(points, &assignment, k, points[0].len());
        sse_history.push(sse(points, &centroids, &assignment));

        let next: Vec<usize> = points
            .par_iter()
            .zip(assignment.par_iter())
            .map(|(p, &cur)| {
                let (best, d) = nearest(p, &centroids);
                if d < sq_dist(p, &centroids[cur]) {
                    best
                } else {
                    cur
                }
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    Clustering { assignment, centroids, sse_history }
}

fn fill_empty_clusters(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &mut [usize], k: usize) {
    loop {
        let mut size = vec![0usize; k];
        for &a in assignment.iter() {
            size[a] += 1;
        }
        let Some(empty) = size.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if size[assignment[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assignment[i]]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("k <= n leaves a cluster with two members");
        assignment[i] = empty;
    }
}

fn compute_centroids(points: &[Vec<f64>], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

fn sse(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points.iter().zip(assignment).map(|(p, &a)| sq_dist(p, &centroids[a])).sum()
}

/// Reduces a bundle of 8760-hour series to `k` representative days.
///
/// Each series is min-max normalised, days become points of dimension
/// `24 × series`, and the member closest to each k-means centroid stands for
/// its cluster with weight equal to the cluster size. Every series is then
/// multiplied by one factor so its weighted annual total matches the input.
/// `k = 365` returns every day with weight 1 unchanged.
pub fn reduce(bundle: &SeriesBundle, k: usize, seed: u64) -> Result<Reduction, TdrError> {
    if k == 0 || k > DAYS_PER_YEAR {
        return Err(TdrError::InvalidK { k, days: DAYS_PER_YEAR });
    }
    let flat: Vec<(String, &[f64])> = bundle.flat().collect();
    if flat.is_empty() {
        return Err(TdrError::Empty);
    }
    for (name, s) in &flat {
        if s.len() != HOURS_PER_YEAR {
            return Err(TdrError::Length { name: name.clone(), len: s.len(), expected: HOURS_PER_YEAR });
        }
    }
    let series: Vec<(String, String)> = bundle
        .groups
        .iter()
        .flat_map(|(g, t)| t.columns.iter().map(move |c| (g.clone(), c.clone())))
        .collect();

    if k == DAYS_PER_YEAR {
        let periods = (0..DAYS_PER_YEAR)
            .map(|d| RepresentativePeriod {
                period_id: d,
                weight: 1,
                source_day: d,
                slices: flat.iter().map(|(_, s)| s[d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY].to_vec()).collect(),
            })
            .collect();
        return Ok(Reduction {
            series,
            periods,
            day_map: (0..DAYS_PER_YEAR).collect(),
            scale: vec![1.0; flat.len()],
            sse_history: vec![0.0],
        });
    }

    let ranges: Vec<(f64, f64)> = flat
        .iter()
        .map(|(_, s)| {
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect();
    let points: Vec<Vec<f64>> = (0..DAYS_PER_YEAR)
        .map(|d| {
            flat.iter()
                .zip(&ranges)
                .flat_map(|((_, s), &(lo, hi))| {
                    let span = hi - lo;
                    s[d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY]
                        .iter()
                        .map(move |&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
                })
                .collect()
        })
        .collect();

    let clustering = kmeans(&points, k, seed);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (d, &c) in clustering.assignment.iter().enumerate() {
        members[c].push(d);
    }
    let mut medoids: Vec<(usize, usize)> = members
        .iter()
        .enumerate()
        .map(|(c, days)| {
            let mut best = (days[0], f64::INFINITY);
            for &d in days {
                let dist = sq_dist(&points[d], &clustering.centroids[c]);
                if dist < best.1 {
                    best = (d, dist);
                }
            }
            (best.0, c)
        })
        .collect();
    // Periods are numbered in calendar order of their medoids.
    medoids.sort_unstable();
    let mut period_of_cluster = vec![0; k];
    for (p, &(_, c)) in medoids.iter().enumerate() {
        period_of_cluster[c] = p;
    }

    let mut periods: Vec<RepresentativePeriod> = medoids
        .iter()
        .enumerate()
        .map(|(p, &(day, c))| RepresentativePeriod {
            period_id: p,
            weight: members[c].len() as u32,
            source_day: day,
            slices: flat.iter().map(|(_, s)| s[day * HOURS_PER_DAY..(day + 1) * HOURS_PER_DAY].to_vec()).collect(),
        })
        .collect();

    let scale: Vec<f64> = flat
        .iter()
        .enumerate()
        .map(|(s, (_, orig))| {
            let target: f64 = orig.iter().sum();
            let got: f64 = periods.iter().map(|p| p.weight as f64 * p.slices[s].iter().sum::<f64>()).sum();
            if got != 0.0 && target != 0.0 {
                target / got
            } else {
                1.0
            }
        })
        .collect();
    for p in &mut periods {
        for (slice, &f) in p.slices.iter_mut().zip(&scale) {
            slice.iter_mut().for_each(|v| *v *= f);
        }
    }

    Ok(Reduction {
        series,
        periods,
        day_map: clustering.assignment.iter().map(|&c| period_of_cluster[c]).collect(),
        scale,
        sse_history: clustering.sse_history,
    })
}
