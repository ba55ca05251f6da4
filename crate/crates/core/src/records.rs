//! In-place operations on flat buffers of fixed-width `u64` records.
//!
//! A buffer of `n` records with width `h` is a `[u64]` of length `n·h`.
//! Sorting runs without any auxiliary allocation so that a run-formation
//! chunk occupies exactly its buffer.

use std::cmp::Ordering;

#[inline]
fn rec(data: &[u64], h: usize, i: usize) -> &[u64] {
    &data[i * h..(i + 1) * h]
}

#[inline]
fn cmp(data: &[u64], h: usize, i: usize, j: usize) -> Ordering {
    rec(data, h, i).cmp(rec(data, h, j))
}

#[inline]
fn swap(data: &mut [u64], h: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let (lo, hi) = data.split_at_mut(j * h);
    lo[i * h..(i + 1) * h].swap_with_slice(&mut hi[..h]);
}

const INSERTION_THRESHOLD: usize = 16;

/// Sorts the records of `data` lexicographically, in place.
pub fn sort_records(data: &mut [u64], h: usize) {
    assert!(
        h > 0 && data.len().is_multiple_of(h),
        "buffer is not whole records"
    );
    if h == 1 {
        data.sort_unstable();
        return;
    }
    let n = data.len() / h;
    let depth = 2 * (usize::BITS - n.leading_zeros()) as usize;
    quicksort(data, h, 0, n, depth);
}

fn quicksort(data: &mut [u64], h: usize, mut lo: usize, mut hi: usize, mut depth: usize) {
    while hi - lo > INSERTION_THRESHOLD {
        if depth == 0 {
            heapsort(data, h, lo, hi);
            return;
        }
        depth -= 1;

        let mid = lo + (hi - lo) / 2;
        let last = hi - 1;
        // median of three into `lo`
        if cmp(data, h, mid, lo) == Ordering::Less {
            swap(data, h, mid, lo);
        }
        if cmp(data, h, last, lo) == Ordering::Less {
            swap(data, h, last, lo);
        }
        if cmp(data, h, last, mid) == Ordering::Less {
            swap(data, h, last, mid);
        }
        swap(data, h, lo, mid);

        // Three-way partition: [lo, lt) < pivot, [lt, i) == pivot, (gt, hi) > pivot.
        // The pivot value always sits at `lt`.
        let (mut lt, mut i, mut gt) = (lo, lo + 1, hi);
        while i < gt {
            match cmp(data, h, i, lt) {
                Ordering::Less => {
                    swap(data, h, lt, i);
                    lt += 1;
                    i += 1;
                }
                Ordering::Greater => {
                    gt -= 1;
                    swap(data, h, i, gt);
                }
                Ordering::Equal => i += 1,
            }
        }

        if lt - lo < hi - gt {
            quicksort(data, h, lo, lt, depth);
            lo = gt;
        } else {
            quicksort(data, h, gt, hi, depth);
            hi = lt;
        }
    }
    insertion_sort(data, h, lo, hi);
}

fn insertion_sort(data: &mut [u64], h: usize, lo: usize, hi: usize) {
    for i in lo + 1..hi {
        let mut j = i;
        while j > lo && cmp(data, h, j - 1, j) == Ordering::Greater {
            swap(data, h, j - 1, j);
            j -= 1;
        }
    }
}

fn heapsort(data: &mut [u64], h: usize, lo: usize, hi: usize) {
    let n = hi - lo;
    let sift = |data: &mut [u64], mut root: usize, end: usize| loop {
        let mut child = 2 * root + 1;
        if child >= end {
            break;
        }
        if child + 1 < end && cmp(data, h, lo + child, lo + child + 1) == Ordering::Less {
            child += 1;
        }
        if cmp(data, h, lo + root, lo + child) != Ordering::Less {
            break;
        }
        swap(data, h, lo + root, lo + child);
        root = child;
    };
    for start in (0..n / 2).rev() {
        sift(data, start, n);
    }
    for end in (1..n).rev() {
        swap(data, h, lo, lo + end);
        sift(data, 0, end);
    }
}

/// Collapses adjacent equal records of a sorted buffer. Returns the new
/// record count; records past it are unspecified.
pub fn dedup_sorted_records(data: &mut [u64], h: usize) -> usize {
    let n = data.len() / h;
    if n == 0 {
        return 0;
    }
    let mut w = 1;
    for r in 1..n {
        if rec(data, h, r) != rec(data, h, w - 1) {
            if r != w {
                data.copy_within(r * h..(r + 1) * h, w * h);
            }
            w += 1;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle(data: &[u64], h: usize, unique: bool) -> Vec<u64> {
        let mut rows: Vec<Vec<u64>> = data.chunks(h).map(<[u64]>::to_vec).collect();
        rows.sort();
        if unique {
            rows.dedup();
        }
        rows.concat()
    }

    #[test]
    fn sorts_small_by_hand() {
        let mut d = vec![1, 0, 0, 0, 1, 1, 0, 0];
        sort_records(&mut d, 2);
        assert_eq!(d, vec![0, 0, 0, 0, 1, 0, 1, 1]);
    }

    #[test]
    fn heapsort_path_matches() {
        let mut d: Vec<u64> = (0..3000u64).map(|x| (x * 7919) % 13).collect();
        let expect = oracle(&d, 3, false);
        heapsort(&mut d, 3, 0, 1000);
        assert_eq!(d, expect);
    }

    proptest! {
        #[test]
        fn matches_oracle(h in 1usize..6, rows in proptest::collection::vec(proptest::collection::vec(0u64..4, 5), 0..400)) {
            let mut data: Vec<u64> = rows.iter().flat_map(|r| r[..h].to_vec()).collect();
            let sorted = oracle(&data, h, false);
            let unique = oracle(&data, h, true);
            sort_records(&mut data, h);
            prop_assert_eq!(&data, &sorted);
            let n = dedup_sorted_records(&mut data, h);
            prop_assert_eq!(&data[..n * h], &unique[..]);
        }
    }
}
