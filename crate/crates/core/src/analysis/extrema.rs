/// Kind of a local extremum in a sampled curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub kind: ExtremumKind,
    /// Ratio between the extremum and the nearest opposing level that must
    /// be crossed to reach a more extreme value (always >= 1).
    pub prominence: f64,
}

/// Interior indices `i` with `v[i] < v[i-1]` and `v[i] <= v[i+1]`.
pub fn local_minima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1)).filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1]).collect()
}

/// Interior indices `i` with `v[i] > v[i-1]` and `v[i] >= v[i+1]`.
pub fn local_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1)).filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1]).collect()
}

/// Number of sign changes of the discrete slope `v[i+1] - v[i]`, ignoring
/// flat steps.
pub fn slope_sign_changes(v: &[f64]) -> usize {
    let signs: Vec<bool> = v
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            (d != 0.0).then_some(d > 0.0)
        })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Local extrema of a positive curve whose multiplicative prominence is at
/// least `min_ratio`. For a minimum at `i`, walk each way until a strictly
/// lower value (or the end) and take the highest value passed; the
/// prominence is the smaller of the two sides divided by `v[i]`. Maxima are
/// treated symmetrically.
pub fn prominent_extrema(v: &[f64], min_ratio: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    let side = |i: usize, step: isize, beyond: &dyn Fn(f64) -> bool, better: &dyn Fn(f64, f64) -> bool| {
        let mut j = i as isize + step;
        let mut best = v[i];
        while j >= 0 && (j as usize) < v.len() {
            let x = v[j as usize];
            if beyond(x) {
                break;
            }
            if better(x, best) {
                best = x;
            }
            j += step;
        }
        best
    };
    for i in local_minima(v) {
        let beyond = |x: f64| x < v[i];
        let higher = |x: f64, b: f64| x > b;
        let l = side(i, -1, &beyond, &higher);
        let r = side(i, 1, &beyond, &higher);
        let p = l.min(r) / v[i];
        if p >= min_ratio {
            out.push(Extremum { index: i, kind: ExtremumKind::Minimum, prominence: p });
        }
    }
    for i in local_maxima(v) {
        let beyond = |x: f64| x > v[i];
        let lower = |x: f64, b: f64| x < b;
        let l = side(i, -1, &beyond, &lower);
        let r = side(i, 1, &beyond, &lower);
        let p = v[i] / l.max(r);
        if p >= min_ratio {
            out.push(Extremum { index: i, kind: ExtremumKind::Maximum, prominence: p });
        }
    }
    out.sort_by_key(|e| e.index);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_extrema() {
        let v = [5.0, 3.0, 4.0, 4.0, 1.0, 2.0];
        assert_eq!(local_minima(&v), vec![1, 4]);
        assert_eq!(local_maxima(&v), vec![2]);
        assert_eq!(slope_sign_changes(&v), 3);
        assert_eq!(slope_sign_changes(&[1.0, 2.0, 3.0]), 0);
    }

    #[test]
    fn prominence_filters_wiggles() {
        // deep valley at 3 with a small wiggle at 6
        let v = [10.0, 8.0, 3.0, 1.0, 4.0, 9.0, 8.5, 9.2, 12.0, 11.0];
        let e = prominent_extrema(&v, 2.0);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].index, 3);
        assert_eq!(e[0].kind, ExtremumKind::Minimum);
        assert!((e[0].prominence - 10.0).abs() < 1e-12);
        let all = prominent_extrema(&v, 1.0);
        assert!(all.iter().any(|x| x.index == 6 && x.kind == ExtremumKind::Minimum));
        assert!(all.iter().any(|x| x.index == 8 && x.kind == ExtremumKind::Maximum));
    }
}
