//! Brute-force reference implementations used only by tests.
//!
//! Everything here is deliberately naive and shares no code with the main
//! crates: connected components by recursive flood fill, identity matching by
//! exhaustive search over assignments, and straight-line formula evaluation.
//! Inputs are plain slices and tuples so no subject types leak in.

/// A connected foreground component found by the flood-fill oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBlob {
    /// Arithmetic mean of member pixel coordinates (x, y).
    pub centroid: (f64, f64),
    /// Tight bounds as (x0, y0, w, h).
    pub bbox: (u32, u32, u32, u32),
    /// Member pixel count.
    pub area: usize,
}

/// One trajectory for the assignment oracle: id plus (t, x, y) samples.
#[derive(Debug, Clone)]
pub struct OracleTrack {
    pub id: u32,
    pub points: Vec<(u32, f64, f64)>,
}

/// Recursive 8-connected flood fill over a row-major boolean mask.
///
/// Guarded to masks of at most 32x32; the oracle is for test-scale inputs
/// only. Components are returned sorted by (y0, x0).
pub fn oracle_components(
    bits: &[bool],
    width: usize,
    height: usize,
) -> Result<Vec<OracleBlob>, String> {
    if width > 32 || height > 32 {
        return Err(format!("oracle mask too large: {width}x{height} (limit 32x32)"));
    }
    if bits.len() != width * height {
        return Err("mask length does not match dimensions".to_string());
    }

    let mut visited = vec![false; bits.len()];
    let mut blobs = Vec::new();
    for start_y in 0..height {
        for start_x in 0..width {
            let idx = start_y * width + start_x;
            if !bits[idx] || visited[idx] {
                continue;
            }
            let mut pixels = Vec::new();
            fill(bits, &mut visited, width, height, start_x, start_y, &mut pixels);

            let area = pixels.len();
            let mut sum_x = 0u64;
            let mut sum_y = 0u64;
            let mut min_x = usize::MAX;
            let mut min_y = usize::MAX;
            let mut max_x = 0usize;
            let mut max_y = 0usize;
            for &(x, y) in &pixels {
                sum_x += x as u64;
                sum_y += y as u64;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
            blobs.push(OracleBlob {
                centroid: (sum_x as f64 / area as f64, sum_y as f64 / area as f64),
                bbox: (
                    min_x as u32,
                    min_y as u32,
                    (max_x - min_x + 1) as u32,
                    (max_y - min_y + 1) as u32,
                ),
                area,
            });
        }
    }
    blobs.sort_by_key(|b| (b.bbox.1, b.bbox.0));
    Ok(blobs)
}

fn fill(
    bits: &[bool],
    visited: &mut [bool],
    width: usize,
    height: usize,
    x: usize,
    y: usize,
    pixels: &mut Vec<(usize, usize)>,
) {
    let idx = y * width + x;
    if visited[idx] || !bits[idx] {
        return;
    }
    visited[idx] = true;
    pixels.push((x, y));
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                fill(bits, visited, width, height, nx as usize, ny as usize, pixels);
            }
        }
    }
}

/// Exhaustive identity assignment: maximum matched count first, then minimum
/// total mean positional distance over temporally overlapping frames.
///
/// Guarded to at most 4 ids per side. Returns (gt id, sys id) pairs sorted by
/// gt id.
pub fn oracle_assignment(
    gt: &[OracleTrack],
    sys: &[OracleTrack],
) -> Result<Vec<(u32, u32)>, String> {
    if gt.len() > 4 || sys.len() > 4 {
        return Err("oracle assignment limited to 4 ids per side".to_string());
    }

    // Pairwise mean distance over overlapping frames; None when no overlap.
    let mut cost = vec![vec![None; sys.len()]; gt.len()];
    for (gi, g) in gt.iter().enumerate() {
        for (si, s) in sys.iter().enumerate() {
            let mut total = 0.0;
            let mut count = 0usize;
            for &(t, gx, gy) in &g.points {
                for &(st, sx, sy) in &s.points {
                    if st == t {
                        total += ((gx - sx).powi(2) + (gy - sy).powi(2)).sqrt();
                        count += 1;
                    }
                }
            }
            if count > 0 {
                cost[gi][si] = Some(total / count as f64);
            }
        }
    }

    // Enumerate every injective partial map gt index -> sys index.
    let mut best: Option<(usize, f64, Vec<Option<usize>>)> = None;
    let choices = sys.len() + 1; // index sys.len() means "unmatched"
    let total_combos = choices.pow(gt.len() as u32);
    for combo in 0..total_combos {
        let mut assignment = Vec::with_capacity(gt.len());
        let mut rem = combo;
        for _ in 0..gt.len() {
            let c = rem % choices;
            rem /= choices;
            assignment.push(if c == sys.len() { None } else { Some(c) });
        }
        // injectivity
        let mut used = vec![false; sys.len()];
        let mut valid = true;
        for a in assignment.iter().flatten() {
            if used[*a] {
                valid = false;
                break;
            }
            used[*a] = true;
        }
        if !valid {
            continue;
        }
        let mut matched = 0usize;
        let mut total = 0.0;
        for (gi, a) in assignment.iter().enumerate() {
            if let Some(si) = a {
                match cost[gi][*si] {
                    Some(c) => {
                        matched += 1;
                        total += c;
                    }
                    None => {
                        valid = false;
                        break;
                    }
                }
            }
        }
        if !valid {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bm, bt, _)) => matched > *bm || (matched == *bm && total < *bt - 1e-12),
        };
        if better {
            best = Some((matched, total, assignment));
        }
    }

    let (_, _, assignment) = best.expect("the all-unmatched assignment is always valid");
    let mut pairs: Vec<(u32, u32)> = assignment
        .iter()
        .enumerate()
        .filter_map(|(gi, a)| a.map(|si| (gt[gi].id, sys[si].id)))
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

/// Straight-line evaluation of the four formulas used by the subject crates.
///
/// - "running_average":        [mu, p, alpha]            -> (1 - alpha) * mu + alpha * p
/// - "arma_transition":        [a, b, c, s_t, s_prev, w] -> a * s_t + b * s_prev + c * w
/// - "bhattacharyya_distance": [q1..., q2...]            -> sqrt(1 - sum sqrt(q1 * q2))
/// - "position_error":         [xg, yg, xs, ys]          -> sqrt((xg-xs)^2 + (yg-ys)^2)
pub fn oracle_formula(name: &str, inputs: &[f64]) -> Result<f64, String> {
    match name {
        "running_average" => {
            if inputs.len() != 3 {
                return Err("running_average expects [mu, p, alpha]".to_string());
            }
            Ok((1.0 - inputs[2]) * inputs[0] + inputs[2] * inputs[1])
        }
        "arma_transition" => {
            if inputs.len() != 6 {
                return Err("arma_transition expects [a, b, c, s_t, s_prev, w]".to_string());
            }
            Ok(inputs[0] * inputs[3] + inputs[1] * inputs[4] + inputs[2] * inputs[5])
        }
        "bhattacharyya_distance" => {
            if inputs.is_empty() || !inputs.len().is_multiple_of(2) {
                return Err("bhattacharyya_distance expects two concatenated histograms of equal length".to_string());
            }
            let half = inputs.len() / 2;
            let mut coeff = 0.0;
            for n in 0..half {
                coeff += (inputs[n] * inputs[half + n]).sqrt();
            }
            Ok((1.0 - coeff).max(0.0).sqrt())
        }
        "position_error" => {
            if inputs.len() != 4 {
                return Err("position_error expects [xg, yg, xs, ys]".to_string());
            }
            let dx = inputs[0] - inputs[2];
            let dy = inputs[1] - inputs[3];
            Ok((dx * dx + dy * dy).sqrt())
        }
        other => Err(format!("unknown formula: {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_component() {
        let mut bits = vec![false; 16];
        bits[5] = true; // (1, 1) in a 4x4 mask
        let blobs = oracle_components(&bits, 4, 4).unwrap();
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area, 1);
        assert_eq!(blobs[0].centroid, (1.0, 1.0));
        assert_eq!(blobs[0].bbox, (1, 1, 1, 1));
    }

    #[test]
    fn checkerboard_is_one_component_under_8_connectivity() {
        let mut bits = vec![false; 16];
        for y in 0..4 {
            for x in 0..4 {
                if (x + y) % 2 == 0 {
                    bits[y * 4 + x] = true;
                }
            }
        }
        let blobs = oracle_components(&bits, 4, 4).unwrap();
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].area, 8);
    }

    #[test]
    fn oversized_mask_rejected() {
        assert!(oracle_components(&vec![false; 33 * 33], 33, 33).is_err());
    }

    #[test]
    fn forced_single_assignment() {
        let gt = vec![OracleTrack { id: 0, points: vec![(0, 1.0, 1.0)] }];
        let sys = vec![OracleTrack { id: 7, points: vec![(0, 1.5, 1.0)] }];
        assert_eq!(oracle_assignment(&gt, &sys).unwrap(), vec![(0, 7)]);
    }

    #[test]
    fn permuted_three_id_case_recovers_inverse_permutation() {
        let track = |id: u32, base: f64| OracleTrack {
            id,
            points: (0..5).map(|t| (t, base + t as f64, base)).collect(),
        };
        let gt = vec![track(0, 0.0), track(1, 50.0), track(2, 100.0)];
        let sys = vec![track(9, 100.0), track(8, 0.0), track(7, 50.0)];
        assert_eq!(oracle_assignment(&gt, &sys).unwrap(), vec![(0, 8), (1, 7), (2, 9)]);
    }

    #[test]
    fn formulas() {
        assert_eq!(oracle_formula("running_average", &[100.0, 100.0, 0.01]).unwrap(), 100.0);
        assert!((oracle_formula("position_error", &[10.0, 10.0, 13.0, 14.0]).unwrap() - 5.0).abs() < 1e-12);
        let d = oracle_formula("bhattacharyya_distance", &[0.5, 0.5, 1.0, 0.0]).unwrap();
        assert!((d - (1.0 - 0.5f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!(oracle_formula("nonsense", &[]).is_err());
    }
}
