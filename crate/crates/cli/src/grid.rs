//! `(d, N)` grid specifications such as `d=2:N=1..10` or `d=3,4:N=1..4`.

fn parse_values(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("{s:?} is not a nonnegative integer"));
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(out)
}

/// Cells of one specification, `d` outer and `N` inner.
pub fn parse_grid(text: &str) -> Result<Vec<(usize, usize)>, String> {
    let (mut ds, mut ns) = (None, None);
    for field in text.split(':') {
        let (key, val) = field.split_once('=').ok_or_else(|| format!("{field:?} is not key=value"))?;
        match key.trim() {
            "d" => ds = Some(parse_values(val)?),
            "N" => ns = Some(parse_values(val)?),
            other => return Err(format!("unknown grid key {other:?}")),
        }
    }
    let (ds, ns) = (ds.ok_or("grid needs d=...")?, ns.ok_or("grid needs N=...")?);
    Ok(ds.iter().flat_map(|&d| ns.iter().map(move |&n| (d, n))).collect())
}

/// The desk-scale grid: `d = 2` with `N = 1..10`, `d = 3, 4` with `N = 1..4`.
pub fn default_grid() -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (1..=10).map(|n| (2, n)).collect();
    cells.extend((3..=4).flat_map(|d| (1..=4).map(move |n| (d, n))));
    cells
}
