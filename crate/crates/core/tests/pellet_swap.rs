use emote_core::emote::synthetic::{FitSettings, PelletSwapTask};
use emote_core::emote::{ImaginationConfig, Variant};

#[test]
fn feature_imagination_learns_the_swap() {
    let task = PelletSwapTask::<f32>::new(0, 2000, 500);
    let (_, o) = task.fit(
        Variant::Feature,
        &ImaginationConfig::default(),
        &FitSettings::default(),
        0,
    );
    assert!(o.action_match >= 0.95, "{o:?}");
    assert!(o.localized >= 0.8, "{o:?}");
}

#[test]
fn reconstruction_alone_changes_nothing_useful() {
    let task = PelletSwapTask::<f32>::new(1, 500, 300);
    let settings = FitSettings {
        delta: 1.0,
        steps: 500,
        ..Default::default()
    };
    let (_, o) = task.fit(Variant::Feature, &ImaginationConfig::default(), &settings, 1);
    assert!(o.localized < 0.05, "{o:?}");
    assert!(o.action_match < 0.8, "{o:?}");
}
