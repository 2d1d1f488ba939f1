/// Water-filling over parallel subchannels.
///
/// Returns `p_i = max(0, μ − noise_power/gains_i²)` with the water level `μ`
/// chosen so the powers sum to `total_power`. Subchannels with a
/// nonpositive gain get no power.
pub fn water_fill(gains: &[f64], total_power: f64, noise_power: f64) -> Vec<f64> {
    let floors: Vec<f64> = gains
        .iter()
        .map(|&g| if g > 0.0 { noise_power / (g * g) } else { f64::INFINITY })
        .collect();
    let mut sorted: Vec<f64> = floors.iter().copied().filter(|f| f.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() || !(total_power > 0.0) {
        return vec![0.0; gains.len()];
    }

    // Largest active set whose weakest member still sits below the level.
    let mut level = 0.0;
    let mut prefix = 0.0;
    for (k, &f) in sorted.iter().enumerate() {
        let candidate = (total_power + prefix + f) / (k + 1) as f64;
        if candidate <= f {
            break;
        }
        prefix += f;
        level = candidate;
    }
    floors.iter().map(|&f| (level - f).max(0.0)).collect()
}
