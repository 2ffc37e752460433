mod common;

use amoebot::engine::{ActionKind, System};
use amoebot::geometry::{Dim, NodePos, Orientation};
use amoebot::scheduler::{run_sequential, AdversaryPolicy, Limits};
use common::{all_schedules, Outcome};
use std::collections::BTreeSet;

fn system(nodes: &[(i32, i32, i32)], orient: &[usize]) -> System {
    let v: Vec<_> = nodes
        .iter()
        .zip(orient.iter().cycle())
        .map(|(&(x, y, z), &o)| (NodePos::new(x, y, z), Orientation::ALL[o]))
        .collect();
    System::new(Dim::Three, &v).unwrap()
}

fn check_against_scheduler(sys: &System, outcomes: &[Outcome]) {
    for o in outcomes {
        let t = run_sequential(sys.clone(), &AdversaryPolicy::scripted(o.schedule.clone()), Limits::default()).unwrap();
        assert!(t.succeeded());
        assert_eq!(t.summary.rounds, o.rounds, "schedule {:?}", o.schedule);
        assert_eq!(t.summary.erosions as usize, o.erosions);
    }
}

#[test]
fn single_amoebot() {
    let sys = system(&[(0, 0, 0)], &[0]);
    let out = all_schedules(&sys);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].rounds, 2);
    check_against_scheduler(&sys, &out);
}

#[test]
fn two_amoebots_every_schedule() {
    for (d, o) in [((1, 1, 0), [0, 0]), ((0, -1, 1), [5, 17]), ((-1, 0, -1), [23, 8])] {
        let sys = system(&[(0, 0, 0), d], &o);
        let out = all_schedules(&sys);
        // Two setup orders times two choices of eroder; a null neighbour
        // blocks erosion, so nothing interleaves with the setups.
        assert_eq!(out.len(), 4);
        for o in &out {
            assert_eq!(o.leaders, 1);
            assert_eq!(o.erosions, 1);
            assert!(o.rounds <= 3);
        }
        let rounds: BTreeSet<u64> = out.iter().map(|o| o.rounds).collect();
        assert_eq!(rounds, BTreeSet::from([2]));
        check_against_scheduler(&sys, &out);
    }
}

#[test]
fn three_amoebot_line_every_schedule() {
    let sys = system(&[(0, 0, 0), (1, -1, 0), (2, -2, 0)], &[0, 9, 14]);
    let out = all_schedules(&sys);
    for o in &out {
        assert_eq!(o.leaders, 1);
        assert_eq!(o.erosions, 2);
        assert!(o.rounds <= 4);
    }
    let max = out.iter().map(|o| o.rounds).max().unwrap();
    let min = out.iter().map(|o| o.rounds).min().unwrap();
    // Values from the enumeration above.
    assert_eq!((min, max), (2, 3));
    check_against_scheduler(&sys, &out);
}

#[test]
fn three_amoebot_triangle_and_square_every_schedule() {
    let tri = system(&[(0, 0, 0), (1, 1, 0), (1, 0, 1)], &[3, 4, 20]);
    let square = system(&[(0, 0, 0), (1, 1, 0), (2, 0, 0), (1, -1, 0)], &[0, 11, 6, 19]);
    for sys in [tri, square] {
        let out = all_schedules(&sys);
        let n = sys.len();
        for o in &out {
            assert_eq!(o.leaders, 1);
            assert_eq!(o.erosions, n - 1);
            assert!(o.rounds <= n as u64 + 1);
        }
        check_against_scheduler(&sys, &out);
    }
}

#[test]
fn square_schedules_use_rule_three() {
    let square = system(&[(0, 0, 0), (1, 1, 0), (2, 0, 0), (1, -1, 0)], &[0, 11, 6, 19]);
    let out = all_schedules(&square);
    let mut saw = false;
    for o in out.iter().take(50) {
        let t = run_sequential(square.clone(), &AdversaryPolicy::scripted(o.schedule.clone()), Limits::default()).unwrap();
        saw |= t.events.iter().any(|e| e.action == ActionKind::Erode && e.rule.map(|r| r.number()) == Some(3));
    }
    assert!(saw);
    // The first erosion in a square after all setups is always by Rule 3.
    let mut sys = square.clone();
    for i in sys.ids().collect::<Vec<_>>() {
        sys.exec_setup(i).unwrap();
    }
    assert!(sys.ids().all(|i| sys.can_erode(i).map(|r| r.number()) == Some(3)));
}
