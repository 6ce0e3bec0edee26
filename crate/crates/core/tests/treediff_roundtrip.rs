use microchange::ast::parse_method;
use microchange::treediff::{
    apply_edit_script, derive_edit_script, match_trees, match_trees_with_stats, MatchConfig,
};
use microchange_testgen::random_pair;

fn script_json(pre: &str, post: &str, cfg: &MatchConfig) -> String {
    let a = parse_method(pre).unwrap();
    let b = parse_method(post).unwrap();
    let m = match_trees(&a, &b, cfg);
    derive_edit_script(&a, &b, &m).unwrap().to_json()
}

#[test]
fn random_mutation_pairs_round_trip() {
    let cfg = MatchConfig::default();
    for seed in 0..200 {
        let (pre_src, post_src, kinds) = random_pair(seed);
        let pre = parse_method(&pre_src).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{pre_src}"));
        let post = parse_method(&post_src).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{post_src}"));
        let m = match_trees(&pre, &post, &cfg);
        m.validate(&pre, &post).unwrap();
        let script = derive_edit_script(&pre, &post, &m).unwrap();
        let out = apply_edit_script(&pre, &script)
            .unwrap_or_else(|e| panic!("seed {seed} {kinds:?}: {e}"));
        assert!(
            out.isomorphic_to(&post),
            "seed {seed} {kinds:?}\n{pre_src}\n{post_src}"
        );
    }
}

#[test]
fn identical_inputs_give_empty_scripts() {
    for seed in 0..50 {
        let (pre, _, _) = random_pair(seed);
        let t = parse_method(&pre).unwrap();
        let m = match_trees(&t, &t, &MatchConfig::default());
        assert_eq!(m.len(), t.len());
        assert!(derive_edit_script(&t, &t, &m).unwrap().is_empty());
    }
}

#[test]
fn scripts_are_deterministic() {
    let cfg = MatchConfig::default();
    for seed in 0..30 {
        let (pre, post, _) = random_pair(seed);
        assert_eq!(script_json(&pre, &post, &cfg), script_json(&pre, &post, &cfg));
    }
}

fn container_count(pre: &str, post: &str, dice_threshold: f64) -> usize {
    let a = parse_method(pre).unwrap();
    let b = parse_method(post).unwrap();
    let cfg = MatchConfig { dice_threshold, ..MatchConfig::default() };
    let (_, stats) = match_trees_with_stats(&a, &b, &cfg);
    stats.containers
}

#[test]
fn raising_dice_threshold_never_adds_container_mappings() {
    for seed in 0..200 {
        let (pre, post, _) = random_pair(seed);
        let counts: Vec<usize> =
            [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&t| container_count(&pre, &post, t)).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "seed {seed}: {counts:?}");
    }
}
