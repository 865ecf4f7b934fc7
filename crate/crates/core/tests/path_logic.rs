use levy_drawdown::mc::{check_path_logic, generate_skeleton, Start};
use levy_drawdown::LevyModel;

#[test]
fn event_descriptions_agree_on_every_jump_path() {
    let model = LevyModel::cramer_lundberg(0.05, 0.1, 2.5).unwrap();
    let starts = [(7.0, 2.0, 3.0), (2.0, 1.0, 0.5), (9.5, 0.0, 6.0), (4.0, 3.5, 1.0)];
    let mut decided = [0usize; 3];
    let mut violations = 0;
    for i in 0..10_000u64 {
        let (y, z, theta) = starts[i as usize % starts.len()];
        let sk = generate_skeleton(&model, 77, i, 1200.0).unwrap();
        let logic = check_path_logic(&sk, 10.0, 8.0, Start { y, z }, theta);
        violations += logic.violations();
        for (n, c) in decided.iter_mut().zip([logic.drawup_first, logic.drawdown_first, logic.theta_first]) {
            *n += usize::from(c.is_some());
        }
    }
    assert_eq!(violations, 0);
    assert!(decided.iter().all(|&n| n > 9_000), "{decided:?}");
}
