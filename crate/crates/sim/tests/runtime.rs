use std::f64::consts::{FRAC_PI_2, PI};

use microswarm::analysis::{detect, extract_speed, smooth_positions, AnalysisError};
use microswarm::scenario::{Fidelity, Optics};
use microswarm::{run, simulate, Arena, Program, RobotSpec, Scenario, World};
use microswarm_core::geom::wrap_angle;
use microswarm_core::kinematics::{MotorCommand, RobotPose};
use microswarm_core::physics::Forcing;
use microswarm_core::Point2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arena() -> Arena {
    Arena {
        width: 4e-3,
        height: 4e-3,
    }
}

fn one_robot(optics: Optics) -> Scenario {
    let mut s = Scenario::new(arena(), vec![RobotSpec::at(2e-3, 2e-3, 0.0)]);
    s.optics = optics;
    s.detection.noise_sigma = 0.0;
    s
}

#[test]
fn dark_scenario_never_moves() {
    let mut s = one_robot(Optics::default());
    s.robots.push(RobotSpec::at(1e-3, 3e-3, 1.0));
    s.detection.noise_sigma = 1e-6;
    s.program = Program::Waypoints {
        plans: vec![vec![Point2::new(3e-3, 3e-3)], vec![Point2::new(1e-3, 1e-3)]],
        arrival_radius: 300e-6,
        gate: None,
    };
    let mut w = World::new(s).unwrap();
    w.force_commands(Some(MotorCommand::OFF));
    let start = w.poses();
    for rec in run(&mut w, 200) {
        assert!(rec.gs_error.is_none());
        for r in &rec.robots {
            assert_eq!(r.delivered, MotorCommand::OFF);
        }
    }
    assert_eq!(w.poses(), start);
}

/// One lit frame shows up in the light delivered one frame later and not before.
#[test]
fn hologram_latency_is_one_frame() {
    for optics in [Optics::Ideal, Optics::default()] {
        let mut w = World::new(one_robot(optics)).unwrap();
        w.force_commands(Some(MotorCommand::OFF));
        let mut recs = vec![w.tick(), w.tick()];
        w.force_commands(Some(MotorCommand::new(1.0, 1.0)));
        recs.push(w.tick());
        w.force_commands(Some(MotorCommand::OFF));
        recs.push(w.tick());
        recs.push(w.tick());
        let lit: Vec<f64> = recs
            .iter()
            .map(|r| r.robots[0].delivered.intensity_left + r.robots[0].delivered.intensity_right)
            .collect();
        assert_eq!(lit[..3], [0.0, 0.0, 0.0], "{optics:?}");
        assert!((lit[3] - 2.0).abs() < 0.2, "{optics:?}: {lit:?}");
        assert_eq!(lit[4], 0.0);
        let xs: Vec<f64> = recs.iter().map(|r| r.robots[0].pose.x).collect();
        assert_eq!(xs[0], xs[2]);
        assert!(xs[3] > xs[2]);
        assert_eq!(xs[3], xs[4]);
    }
}

fn figure_scenario(seed: u64) -> Scenario {
    let mut s = Scenario::new(
        arena(),
        vec![RobotSpec::at(1e-3, 1e-3, 0.3), RobotSpec::at(3e-3, 3e-3, -2.0)],
    );
    s.seed = seed;
    s.program = Program::Waypoints {
        plans: vec![vec![Point2::new(2.5e-3, 1.5e-3)], vec![Point2::new(1.5e-3, 2.5e-3)]],
        arrival_radius: 300e-6,
        gate: None,
    };
    s
}

#[test]
fn runs_are_byte_identical_for_a_seed() {
    let (a, sa) = simulate(figure_scenario(3), 120).unwrap();
    let (b, sb) = simulate(figure_scenario(3), 120).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    let (c, _) = simulate(figure_scenario(4), 120).unwrap();
    assert_ne!(a, c);
}

#[test]
fn detection_noise_has_the_requested_spread() {
    let sigma = 1e-6;
    let truth = vec![RobotPose::new(1e-3, 2e-3, 0.7)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    let (mut dx, mut dy, mut dh) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let d = detect(&truth, &[100e-6], sigma, &mut rng)[0];
        dx.push(d.x - truth[0].x);
        dy.push(d.y - truth[0].y);
        dh.push(wrap_angle(d.heading - truth[0].heading));
    }
    let std = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    assert!((std(&dx) / sigma - 1.0).abs() < 0.05, "{}", std(&dx));
    assert!((std(&dy) / sigma - 1.0).abs() < 0.05, "{}", std(&dy));
    // heading error: centred, and as many positive as negative draws
    let mean_h = dh.iter().sum::<f64>() / n as f64;
    assert!(mean_h.abs() < 4.0 * std(&dh) / (n as f64).sqrt());
    let positive = dh.iter().filter(|h| **h > 0.0).count() as f64;
    assert!((positive - n as f64 / 2.0).abs() < 4.0 * (n as f64 / 4.0).sqrt());
    // the axis spans 2δ with per-motor noise σ√2, so the spread is σ/δ
    assert!((std(&dh) / (sigma / 100e-6) - 1.0).abs() < 0.05);
    assert_eq!(detect(&truth, &[100e-6], 0.0, &mut rng), truth);
}

#[test]
fn smoothing_examples() {
    let track: Vec<Point2> = (0..20).map(|i| Point2::new(i as f64, (i * i) as f64)).collect();
    assert_eq!(smooth_positions(&track, 0.0), track);
    let flat = vec![Point2::new(3.0, -1.0); 15];
    for p in smooth_positions(&flat, 2.5) {
        assert!((p.x - 3.0).abs() < 1e-14 && (p.y + 1.0).abs() < 1e-14);
    }
    assert_eq!(smooth_positions(&track[..1], 3.0), track[..1].to_vec());
}

proptest! {
    #[test]
    fn linear_tracks_survive_smoothing_in_the_interior(
        x0 in -1.0..1.0f64, vx in -1.0..1.0f64, vy in -1.0..1.0f64, sigma in 0.3..3.0f64,
    ) {
        let n = 60;
        let track: Vec<Point2> = (0..n).map(|i| Point2::new(x0 + vx * i as f64, vy * i as f64)).collect();
        let s = smooth_positions(&track, sigma);
        let reach = (4.0 * sigma).ceil() as usize;
        for i in reach..n - reach {
            prop_assert!((s[i].x - track[i].x).abs() < 1e-9);
            prop_assert!((s[i].y - track[i].y).abs() < 1e-9);
        }
    }
}

#[test]
fn speed_extraction_examples() {
    let v = 100e-6;
    let dt = 0.1;
    let straight: Vec<Point2> = (0..30).map(|i| Point2::new(v * dt * i as f64, 0.0)).collect();
    assert!((extract_speed(&straight, dt).unwrap() / v - 1.0).abs() < 1e-12);
    assert_eq!(extract_speed(&vec![Point2::new(1.0, 2.0); 9], dt).unwrap(), 0.0);
    assert_eq!(extract_speed(&straight[..1], dt), Err(AnalysisError::TooFewFrames(1)));
    assert_eq!(extract_speed(&[], dt), Err(AnalysisError::TooFewFrames(0)));
}

/// Chords under-read arc speed by `sinc(Δφ/2)`.
#[test]
fn circular_motion_speed_matches_the_chord_oracle() {
    let v = 80e-6;
    let dt = 0.1;
    for frames_per_rev in [50usize, 64, 200] {
        let dphi = 2.0 * PI / frames_per_rev as f64;
        let radius = v * dt / dphi;
        let track: Vec<Point2> = (0..=3 * frames_per_rev)
            .map(|i| Point2::from_angle(i as f64 * dphi) * radius)
            .collect();
        let got = extract_speed(&track, dt).unwrap();
        let chord = v * (dphi / 2.0).sin() / (dphi / 2.0);
        assert!((got / chord - 1.0).abs() < 1e-9);
        assert!((got / v - 1.0).abs() < 0.01);
    }
}

#[test]
fn leaving_the_arena_halts_and_flags() {
    let mut s = one_robot(Optics::Ideal);
    s.robots[0] = RobotSpec::at(3.7e-3, 2e-3, 0.0);
    let mut w = World::new(s).unwrap();
    w.force_commands(Some(MotorCommand::new(1.0, 1.0)));
    let recs = run(&mut w, 100);
    let a = arena();
    assert!(recs.iter().any(|r| r.robots[0].halt));
    for rec in &recs {
        for r in &rec.robots {
            assert!(a.contains(r.pose.position()) || r.halt);
        }
    }
    let first_halt = recs.iter().position(|r| r.robots[0].halt).unwrap();
    assert!(recs[first_halt..].iter().all(|r| r.robots[0].halt));
    let last = recs.last().unwrap().robots[0].pose;
    assert!(a.contains(last.position()));
}

/// A straight run with the kinematic gain set from the physics lookup moves
/// at the same speed either way.
#[test]
fn kinematic_and_physics_fidelity_agree_on_straight_runs() {
    let dphi_full = 1.0;
    let mut phys = one_robot(Optics::Ideal);
    phys.robots[0] = RobotSpec::at(0.5e-3, 2e-3, 0.0);
    phys.robots[0].drive.crosstalk_s = 0.0;
    phys.fidelity = Fidelity::Physics {
        delta_phi_full: dphi_full,
        samples: 16,
        forcing: Forcing::reference(0.0),
    };
    let mut w = World::new(phys.clone()).unwrap();
    w.force_commands(Some(MotorCommand::new(0.5, 0.5)));
    let a = run(&mut w, 40);
    let track_a: Vec<Point2> = a.iter().map(|r| r.robots[0].pose.position()).collect();
    let v_phys = extract_speed(&track_a, 0.1).unwrap();
    assert!(v_phys > 0.0);

    let rows = microswarm_core::physics::steady_curve(
        &phys.robots[0].geometry,
        &phys.medium,
        &Forcing::reference(0.0),
        &[dphi_full],
    )
    .unwrap();
    let mut kin = phys;
    kin.fidelity = Fidelity::Kinematic;
    kin.robots[0].drive.speed_gain_k = rows[0].steady.as_ref().unwrap().speed_v.abs();
    let mut w = World::new(kin).unwrap();
    w.force_commands(Some(MotorCommand::new(0.5, 0.5)));
    let b = run(&mut w, 40);
    let track_b: Vec<Point2> = b.iter().map(|r| r.robots[0].pose.position()).collect();
    let v_kin = extract_speed(&track_b, 0.1).unwrap();
    assert!((v_kin / v_phys - 1.0).abs() < 0.05, "{v_kin} vs {v_phys}");
    // both runs are straight
    assert!(a.iter().chain(&b).all(|r| r.robots[0].pose.heading == 0.0));
}

#[test]
fn scenario_files_are_strict() {
    let good = r#"{"arena":{"width":0.004,"height":0.004},"robots":[{"pose":{"x":0.001,"y":0.001,"heading":0.0}}]}"#;
    let s = Scenario::from_json(good).unwrap();
    assert_eq!(s.frame_rate, 10.0);
    assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);

    let extra = good.replacen("\"robots\"", "\"colour\":1,\"robots\"", 1);
    assert!(Scenario::from_json(&extra).is_err());
    let outside = good.replace("\"x\":0.001", "\"x\":0.005");
    assert!(Scenario::from_json(&outside).unwrap_err().to_string().contains("outside"));
    let zero_rate = good.replacen("\"robots\"", "\"frame_rate\":0,\"robots\"", 1);
    assert!(Scenario::from_json(&zero_rate).is_err());
    let bad_program = good.replacen(
        "\"robots\"",
        r#""program":{"kind":"follow","follow":{"leaders":[[0,0]],"standoff_distance":1e-4}},"robots""#,
        1,
    );
    assert!(Scenario::from_json(&bad_program).is_err());
}

#[test]
fn shape_program_sends_every_robot_to_its_own_waypoint() {
    let robots = (0..4).map(|i| RobotSpec::at(0.8e-3 + 0.8e-3 * i as f64, 0.6e-3, FRAC_PI_2)).collect();
    let mut s = Scenario::new(arena(), robots);
    s.optics = Optics::Ideal;
    s.program = serde_json::from_str(
        r#"{"kind":"shape","preset":{"shape":"line","center":{"x":0.002,"y":0.0025},"length":0.0024,"angle":0.0,"count":4}}"#,
    )
    .unwrap();
    let mut w = World::new(s).unwrap();
    let recs = run(&mut w, 3000);
    assert!(w.is_complete(), "{} frames", recs.len());
    assert!(w.arrivals().iter().all(|a| a.len() == 1));
}

/// A moving mark keeps the controller history, so a follower drives at full
/// power behind its leader instead of restarting its turn logic every frame.
#[test]
fn follower_keeps_up_with_a_moving_mark() {
    let mut s = Scenario::new(
        arena(),
        vec![RobotSpec::at(1e-3, 2e-3, FRAC_PI_2), RobotSpec::at(1e-3, 1e-3, FRAC_PI_2)],
    );
    s.robots[0].drive.speed_gain_k = 40e-6;
    s.optics = Optics::Ideal;
    s.program = serde_json::from_str(
        r#"{"kind":"follow","follow":{"leaders":[[1,0]],"standoff_distance":3e-4},"plans":[[{"x":0.001,"y":0.0035}]],"arrival_radius":5e-5}"#,
    )
    .unwrap();
    let mut w = World::new(s).unwrap();
    let recs = run(&mut w, 100);
    let gap = |r: &microswarm::FrameRecord| r.robots[0].pose.position().dist(r.robots[1].pose.position());
    assert!(recs.iter().any(|r| r.robots[1].command == MotorCommand::new(1.0, 1.0)));
    assert!(gap(recs.last().unwrap()) < 0.5e-3, "{}", gap(recs.last().unwrap()));
}
