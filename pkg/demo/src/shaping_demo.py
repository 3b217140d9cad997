import os
import logging
from pprint import pformat

from colorama import Fore, Style, init

import packages.sdk.src as Shaper

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

PRESET = os.path.join(os.path.dirname(__file__), "..", "res", "two_user_8pam_sweep.json")


def main():
    init()
    cfg = Shaper.ExperimentConfig.load_config(PRESET)

    # Step 1: Channel of the two-user room
    H = cfg.channel()
    logger.info(Fore.GREEN + pformat(Shaper.Channel.channel_summary(H, cfg.led_positions, cfg.user_positions)) + Style.RESET_ALL)

    # Step 2: Shaped design and its uniform baseline at two A/σ points
    cfg = cfg.with_overrides(
        a_over_sigma_db=(50.0, 60.0),
        methods=("zf_ao", "uniform_baseline_zf"),
        output_dir=os.path.join("results", "demo"),
    )
    Shaper.init(cfg.runtime_overrides())
    result = Shaper.Experiment.run_sweep(cfg)
    for point in result.points:
        colour = Fore.GREEN if point.ok else Fore.RED
        logger.info(colour + f"{point.method} at {point.a_over_sigma_db:g} dB: {point.sum_rate:.4f} bits" + Style.RESET_ALL)

    # Step 3: Shaping gain and optimised distributions
    logger.info(Fore.GREEN + "\n" + Shaper.Reports.gap_report(result).to_string(index=False) + Style.RESET_ALL)
    logger.info(Fore.GREEN + "\n" + Shaper.Reports.pmf_report(result, 60.0, "zf_ao") + Style.RESET_ALL)


if __name__ == "__main__":
    main()
