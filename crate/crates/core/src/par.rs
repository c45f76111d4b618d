//! Deterministic reductions over index lists, parallel when the `parallel`
//! feature is enabled.

use crate::error::Result;

/// Pairs `(i, j)` with `i < j < n`, in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            v.push((i, j));
        }
    }
    v
}

#[inline]
fn better<T: Ord + Copy>(a: Option<(f64, T)>, b: Option<(f64, T)>) -> Option<(f64, T)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            // larger value wins, ties go to the smaller key
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Maximum of `f` over `items`, ties broken by the smallest item.
pub fn max_sequential<T, F>(items: &[T], f: F) -> Result<Option<(f64, T)>>
where
    T: Ord + Copy,
    F: Fn(T) -> Result<f64>,
{
    let mut best = None;
    for &it in items {
        let v = f(it)?;
        best = better(best, Some((v, it)));
    }
    Ok(best)
}

#[cfg(feature = "parallel")]
pub fn max_parallel<T, F>(items: &[T], f: F) -> Result<Option<(f64, T)>>
where
    T: Ord + Copy + Send + Sync,
    F: Fn(T) -> Result<f64> + Sync + Send,
{
    use rayon::prelude::*;
    items
        .par_iter()
        .map(|&it| f(it).map(|v| Some((v, it))))
        .try_reduce(|| None, |a, b| Ok(better(a, b)))
}

/// Maximum of `f` over `items` using the configured execution mode.
pub fn try_max<T, F>(items: &[T], f: F) -> Result<Option<(f64, T)>>
where
    T: Ord + Copy + Send + Sync,
    F: Fn(T) -> Result<f64> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        max_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        max_sequential(items, f)
    }
}

/// Order-preserving map.
pub fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_prefer_smallest_key() {
        let items = pairs(4);
        let r = try_max(&items, |(i, j)| Ok(((i + j) % 2) as f64)).unwrap();
        assert_eq!(r, Some((1.0, (0, 1))));
        let s = max_sequential(&items, |(i, j)| Ok(((i + j) % 2) as f64)).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn empty_is_none() {
        assert_eq!(try_max::<(usize, usize), _>(&[], |_| Ok(1.0)).unwrap(), None);
    }
}
