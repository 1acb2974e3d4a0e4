from sta_mdct.services.experiment import ExperimentReport, run, run_experiment
from sta_mdct.services.manifest import load_plan, write_manifest

__all__ = ["ExperimentReport", "load_plan", "run", "run_experiment", "write_manifest"]
