"""Family-wise error rate on data with no effect at all.

One-condition rows are split into two pseudo-groups per replicate, so
every rejection is a false positive.  The rate should sit near the
nominal level for the bound-corrected scheme.
"""

from permsig.dataset import synth_effect
from permsig.permtest import StudySettings, mc_stddev, type1_study
from permsig.pipeline import PipelineSpec
from permsig.rng import PermutationPlan
from permsig.validate import Scheme

d = synth_effect(60, 12, 0.0, PermutationPlan(3, 0), classes=1)
settings = StudySettings(scheme=Scheme.RUB, m=400, master_seed=9)
report = type1_study(PipelineSpec(reducer="pls"), d, settings)

sd = mc_stddev(settings.alpha, report.m)
print(f"replicates        {report.m}")
print(f"alpha             {settings.alpha}")
print(f"fwe rate          {report.fwe_rate:.4f} [{report.fwe_rate_sd:.4f}]")
print(f"acceptable band   [{settings.alpha - 3 * sd:.4f}, {settings.alpha + 3 * sd:.4f}]")
print(f"null error mean   {report.null_mean:.4f} (includes mu = {report.mu:.4f})")
