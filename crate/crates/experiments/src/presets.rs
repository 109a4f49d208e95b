//! Named scenarios for the seven reference figures.

use crate::config::{parse_config, ConfigError, ScenarioConfig};

pub const NAMES: [&str; 7] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

const SUMMARIES: [&str; 7] = [
    "fig1: K=10, M=128, fD Ts=0.1, p_u sweep (MRC/ZF, Monte Carlo and bounds, aged and predicted CSI)",
    "fig2: K=10, M=128, p_u=10 dB, fD Ts sweep (bounds, aged/predicted/current/perfect CSI)",
    "fig3: K=10, fD Ts=0.1, p_u=E_u/sqrt(M), E_u=15 dB, M sweep (bounds and scaling limits)",
    "fig4: downlink, K=10, M=64, p_p=10 dB, fD Ts=0.1, p_b sweep (closed form and Monte Carlo)",
    "fig5: downlink, K=5, fD Ts=0.1, p_p=tau E_u/sqrt(M), E_u=3 dB, p_b=E_b/sqrt(M), M sweep",
    "fig6: multicell, aged CSI, C=7, K=10, E_u=15 dB, p_u=E_u/M^gamma, gamma in {0.3, 0.5, 0.7}, M sweep",
    "fig7: multicell, predicted CSI, C=7, K=10, E_u=15 dB, p_u=E_u/M^gamma, gamma in {0.3, 0.5, 0.7}, M sweep",
];

const MULTICELL_M: &str = "16, 64, 256, 1024, 4096, 16384, 65536, 262144, 1048576, 4194304, \
                           16777216, 67108864, 268435456, 1073741824";

fn text(name: &str) -> Option<String> {
    let body = match name {
        "fig1" => "[scenario]\nexperiment = uplink\nsweep = uplink.p_u_db\nvalues = -10, -5, 0, 5, 10, 15, 20\ndrop_file = fig1_drop.csv\n\
                   [uplink]\nM = 128\nK = 10\nfd_ts = 0.1\npred_orders = 1, 2\nmonte_carlo = true\n"
            .to_string(),
        "fig2" => "[scenario]\nexperiment = uplink\nsweep = uplink.fd_ts\n\
                   values = 0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2, 0.22, 0.24, 0.26, 0.28, 0.3\ndrop_file = fig2_drop.csv\n\
                   [uplink]\nM = 128\nK = 10\np_u_db = 10\npred_orders = 1, 2\nreference_curves = true\n"
            .to_string(),
        "fig3" => "[scenario]\nexperiment = uplink\nsweep = uplink.M\n\
                   values = 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072, 262144, 524288, 1048576\n\
                   [uplink]\nK = 10\nfd_ts = 0.1\ngamma = 0.5\nE_u_db = 15\npred_orders = 1, 2\nunit_betas = true\n"
            .to_string(),
        "fig4" => "[scenario]\nexperiment = downlink\nsweep = downlink.p_b_db\nvalues = -10, -5, 0, 5, 10, 15, 20\n\
                   [downlink]\nM = 64\nK = 10\np_p_db = 10\nfd_ts = 0.1\nmonte_carlo = true\n"
            .to_string(),
        "fig5" => "[scenario]\nexperiment = downlink\nsweep = downlink.M\n\
                   values = 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072, 262144, 524288, 1048576\n\
                   [downlink]\nK = 5\nfd_ts = 0.1\nbeta_exp = 0.5\nE_u_db = 3\nE_b_db = 10\n"
            .to_string(),
        "fig6" => format!(
            "[scenario]\nexperiment = multicell\nsweep = multicell.M\nvalues = {MULTICELL_M}\n\
             [multicell]\nC = 7\nK = 10\nbeta_same = 1\nbeta_cross = 0.32\ngammas = 0.3, 0.5, 0.7\nE_u_db = 15\n\
             fd_ts = 0.1\ninclude_aged = true\ninclude_current = true\n"
        ),
        "fig7" => format!(
            "[scenario]\nexperiment = multicell\nsweep = multicell.M\nvalues = {MULTICELL_M}\n\
             [multicell]\nC = 7\nK = 10\nbeta_same = 1\nbeta_cross = 0.32\ngammas = 0.3, 0.5, 0.7\nE_u_db = 15\n\
             fd_ts = 0.1\npred_orders = 1, 2\ninclude_aged = true\n"
        ),
        _ => return None,
    };
    Some(body.replacen("[scenario]\n", &format!("[scenario]\nname = {name}\n"), 1))
}

/// Preset configuration by name (`fig1` to `fig7`).
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let body = text(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    parse_config(&body)
}

/// One line per preset with its parameters.
pub fn list_presets() -> String {
    let mut out = SUMMARIES.join("\n");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn listing() {
        let text = list_presets();
        assert_eq!(text.lines().count(), 7);
        assert!(text.contains("fig2: K=10, M=128, p_u=10 dB, fD Ts sweep"));
        assert!(text.contains("fig4: downlink, K=10, M=64, p_p=10 dB, fD Ts=0.1"));
        for (line, name) in text.lines().zip(NAMES) {
            assert!(line.starts_with(&format!("{name}: ")));
        }
    }

    #[test]
    fn every_preset_parses() {
        for name in NAMES {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
        }
        assert_eq!(preset("fig4").unwrap().experiment, Experiment::Downlink);
        assert_eq!(preset("fig6").unwrap().multicell.gammas, vec![0.3, 0.5, 0.7]);
        assert!(matches!(preset("fig8"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn fig1_matches_caption() {
        let c = preset("fig1").unwrap();
        assert_eq!((c.uplink.k, c.uplink.m, c.uplink.fd_ts), (10, 128, 0.1));
        assert_eq!(c.sweep.unwrap().key, "uplink.p_u_db");
    }
}
