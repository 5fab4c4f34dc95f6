import os
import sys

from ionbath.main import main

if __name__ == '__main__':
    os.environ["IONBATH_LOG_LEVEL"] = "DEBUG"
    os.environ["IONBATH_OUTPUT_DIR"] = "results"

    sys.exit(main(["synth", "--config", "configs/thermal_vacuum_nbar025.yaml"]))
