use crowdstep::cli::bottleneck_run;
use crowdstep::config::SimConfig;
use crowdstep::engine::step;
use crowdstep::metrics::door_crossings;
use crowdstep::model::{GaitParams, ModelParams};
use crowdstep::scenarios::{build_corridor, build_room, ScenarioSpec};

#[test]
fn corridor_keeps_every_agent() {
    for seed in 0..3 {
        let mut world =
            build_corridor(&ScenarioSpec::corridor(3.0), &GaitParams::default(), &ModelParams::default(), seed).unwrap();
        let ids: Vec<u32> = world.agents.iter().map(|a| a.id).collect();
        for _ in 0..150 {
            let report = step(&mut world).unwrap();
            assert!(report.exited.is_empty());
            assert_eq!(report.moves.len(), ids.len());
            world.check_invariants().unwrap();
        }
        assert!(world.agents.iter().map(|a| a.id).eq(ids.iter().copied()));
    }
}

#[test]
fn room_agents_leave_only_through_the_door() {
    let spec = ScenarioSpec {
        agent_count: Some(120),
        ..ScenarioSpec::room(1.25)
    };
    let mut world = build_room(&spec, &GaitParams::default(), &ModelParams::default(), 4).unwrap();
    let door = world.env.exits[0];
    let n = world.agents.len();
    let mut crossed = 0;
    while !world.agents.is_empty() && world.tick < 1000 {
        let before = world.agents.clone();
        let report = step(&mut world).unwrap();
        crossed += door_crossings(&before, &report.exited, &door);
        assert_eq!(before.len(), world.agents.len() + report.exited.len());
        world.check_invariants().unwrap();
        for a in &world.agents {
            assert!(a.position.x < 10.0 && a.position.y > 0.0 && a.position.y < 10.0);
        }
    }
    assert_eq!(crossed, n);
    assert!(world.agents.is_empty());
}

#[test]
fn evacuation_counts_match_initial_population() {
    let config = SimConfig::default();
    for width in [1.0, 2.0] {
        let run = bottleneck_run(&config, width, 0).unwrap();
        assert_eq!(run.initial_agents, 300);
        assert_eq!(run.crossings, run.initial_agents, "width {width}");
        assert_eq!(run.remaining, 0);
        assert_eq!(run.crossings_per_tick.len() as u64, run.ticks);
    }
}
