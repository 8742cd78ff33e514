//! Suffix array, LCP array and longest-previous-factor table.
//!
//! `lpf[i]` is the length of the longest prefix of `s[i..]` that also starts
//! at some position `j < i` (the occurrence at `j` may overlap `i`). It is
//! the maximum of the LCPs of suffix `i` with its nearest lexicographic
//! neighbours that start earlier in the text, found with one stack sweep in
//! each direction over the suffix array.

/// Suffix array by prefix doubling with two-pass radix sort, O(n log n).
pub fn suffix_array(s: &[u8]) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_unstable_by_key(|&i| s[i as usize]);
    let mut rank = vec![0u32; n];
    for w in 1..n {
        let (p, q) = (sa[w - 1] as usize, sa[w] as usize);
        rank[q] = rank[p] + u32::from(s[p] != s[q]);
    }
    let mut tmp = vec![0u32; n];
    let mut by_second = vec![0u32; n];
    let mut count = vec![0u32; n + 1];
    let mut k = 1usize;
    while (rank[sa[n - 1] as usize] as usize) < n - 1 {
        // Order by the rank at offset k: suffixes without one come first.
        let mut m = 0;
        for i in n - k.min(n)..n {
            by_second[m] = i as u32;
            m += 1;
        }
        for &p in sa.iter() {
            if p as usize >= k {
                by_second[m] = p - k as u32;
                m += 1;
            }
        }
        // Stable counting sort on the first rank.
        count.iter_mut().for_each(|c| *c = 0);
        for &r in rank.iter() {
            count[r as usize + 1] += 1;
        }
        for r in 1..=n {
            count[r] += count[r - 1];
        }
        for &p in by_second.iter() {
            let r = rank[p as usize] as usize;
            sa[count[r] as usize] = p;
            count[r] += 1;
        }
        let key = |i: usize, rank: &[u32]| (rank[i], if i + k < n { rank[i + k] as i64 } else { -1 });
        tmp[sa[0] as usize] = 0;
        for w in 1..n {
            let (p, q) = (sa[w - 1] as usize, sa[w] as usize);
            tmp[q] = tmp[p] + u32::from(key(p, &rank) != key(q, &rank));
        }
        std::mem::swap(&mut rank, &mut tmp);
        k *= 2;
    }
    sa
}

/// Kasai's algorithm: `lcp[r]` is the common prefix length of the suffixes
/// at ranks `r - 1` and `r`; `lcp[0] = 0`.
pub fn lcp_array(s: &[u8], sa: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut rank = vec![0u32; n];
    for (r, &p) in sa.iter().enumerate() {
        rank[p as usize] = r as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && s[i + h] == s[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Longest previous factor of every position.
pub fn longest_previous_factor(s: &[u8]) -> Vec<u32> {
    let n = s.len();
    let sa = suffix_array(s);
    let lcp = lcp_array(s, &sa);
    let mut lpf = vec![0u32; n];

    // Stack entries: (text position, LCP with the entry directly above).
    let mut stack: Vec<(u32, u32)> = Vec::new();
    for r in 0..n {
        let pos = sa[r];
        let mut cur = if r == 0 { 0 } else { lcp[r] };
        while let Some(&(p, _)) = stack.last() {
            if p < pos {
                break;
            }
            stack.pop();
            if let Some(top) = stack.last() {
                cur = cur.min(top.1);
            }
        }
        if let Some(top) = stack.last_mut() {
            lpf[pos as usize] = cur;
            top.1 = cur;
        } else {
            lpf[pos as usize] = 0;
        }
        stack.push((pos, 0));
    }

    stack.clear();
    for r in (0..n).rev() {
        let pos = sa[r];
        let mut cur = if r + 1 < n { lcp[r + 1] } else { 0 };
        while let Some(&(p, _)) = stack.last() {
            if p < pos {
                break;
            }
            stack.pop();
            if let Some(top) = stack.last() {
                cur = cur.min(top.1);
            }
        }
        if let Some(top) = stack.last_mut() {
            let v = &mut lpf[pos as usize];
            *v = (*v).max(cur);
            top.1 = cur;
        }
        stack.push((pos, 0));
    }
    lpf
}
