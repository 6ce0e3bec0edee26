//! Exhaustive comparison of the line diff against a brute-force LCS
//! oracle over all line sequences of length at most 8 on {x, y}.

use microchange::textdiff::line_diff;

fn sequences(max: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![vec![]];
    for len in 1..=max {
        for bits in 0..(1u32 << len) {
            out.push((0..len).map(|i| if bits >> i & 1 == 0 { "x" } else { "y" }).collect());
        }
    }
    out
}

fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            t[i][j] = if a[i] == b[j] { t[i + 1][j + 1] + 1 } else { t[i + 1][j].max(t[i][j + 1]) };
        }
    }
    t[0][0]
}

fn kept<'a>(lines: &[&'a str], changed: &std::collections::BTreeSet<u32>) -> Vec<&'a str> {
    lines
        .iter()
        .enumerate()
        .filter(|(i, _)| !changed.contains(&(*i as u32 + 1)))
        .map(|(_, l)| *l)
        .collect()
}

pub fn mismatches() -> usize {
    let seqs = sequences(8);
    let mut bad = 0;
    for a in &seqs {
        let text_a = a.join("\n");
        for b in &seqs {
            let text_b = b.join("\n");
            let d = line_diff(&text_a, &text_b);
            let optimal = a.len() + b.len() - 2 * lcs_len(a, b);
            let alignment_ok = kept(a, &d.pre) == kept(b, &d.post);
            let in_range = d.pre.iter().all(|&l| l >= 1 && l as usize <= a.len())
                && d.post.iter().all(|&l| l >= 1 && l as usize <= b.len());
            if d.len() != optimal || !alignment_ok || !in_range {
                bad += 1;
            }
        }
    }
    bad
}

#[test]
fn line_diff_matches_lcs_oracle_exhaustively() {
    assert_eq!(sequences(8).len(), 511);
    assert_eq!(mismatches(), 0);
}

#[test]
fn line_diff_is_symmetric() {
    let seqs = sequences(5);
    for a in &seqs {
        for b in &seqs {
            let (ta, tb) = (a.join("\n"), b.join("\n"));
            let ab = line_diff(&ta, &tb);
            let ba = line_diff(&tb, &ta);
            assert_eq!(ab.pre, ba.post, "{ta:?} vs {tb:?}");
            assert_eq!(ab.post, ba.pre);
        }
    }
}

#[test]
fn large_inputs_agree_with_optimal_size() {
    // Exercises the prefix/suffix trimming on longer texts.
    let a: Vec<String> = (0..300).map(|i| format!("line {}", i % 7)).collect();
    let mut b = a.clone();
    b.insert(150, "new".into());
    b.remove(10);
    let d = line_diff(&a.join("\n"), &b.join("\n"));
    assert_eq!(d.len(), 2);
}
