"""
Monte Carlo Models

Archive of finished Monte Carlo studies.

Business Logic:
- One MonteCarloReport per saved run of `montecarlo --save`, holding the
  scenario file content and the run metadata.
- One MonteCarloRow per report CSV line, values in deg/s as in the file.
- NaN values (RMSE with no successful run, the speed bound at rest) are
  stored as NULL; unbounded CRBs keep inf.

Models:
- MonteCarloReport: The run header.
- MonteCarloRow: The (speed, method, axis) results.
"""

import math

from django.db import models, transaction

from apps.core.models import TimeStampedModel
from apps.geometry.arrays import AXES
from .harness import SPEED_AXIS, McMethod

AXIS_CHOICES = [(axis, axis) for axis in AXES + (SPEED_AXIS,)]


def _stored(value):
    return None if math.isnan(value) else float(value)


def _loaded(value):
    return math.nan if value is None else value


class MonteCarloReportManager(models.Manager):
    """
    Default manager for MonteCarloReport.

    Usage:
        MonteCarloReport.objects.from_report(report, 'planar_inplane')
    """

    def from_report(self, report, name=None):
        """Persist an McReport and its rows in one transaction."""
        with transaction.atomic():
            record = self.create(
                name=name or report.name or 'unnamed',
                master_seed=report.master_seed,
                n_runs=report.n_runs,
                wall_time_s=report.wall_time_s,
                threads=report.threads,
                scenario=report.scenario_payload,
            )
            MonteCarloRow.objects.bulk_create([
                MonteCarloRow(
                    report=record,
                    speed_dps=speed_dps,
                    method=method,
                    axis=axis,
                    rmse_dps=_stored(rmse_dps),
                    sqrt_crb_dps=_stored(sqrt_crb_dps),
                    sqrt_crb_sat_dps=_stored(sqrt_crb_sat_dps),
                    n_runs=n_runs,
                    failures=failures,
                )
                for speed_dps, method, axis, rmse_dps, sqrt_crb_dps, sqrt_crb_sat_dps, n_runs, failures
                in report.csv_rows()
            ])
        return record


class MonteCarloReport(TimeStampedModel):
    """
    A saved Monte Carlo study.

    Attributes:
        name (CharField): Scenario label, the file stem by default.
        master_seed (PositiveBigIntegerField): Seed that reproduces the run.
        n_runs (PositiveIntegerField): Realizations per grid point.
        wall_time_s (FloatField): Elapsed time of the study.
        threads (PositiveSmallIntegerField): Worker threads used.
        scenario (JSONField): Scenario file content.

    Example:
        >>> record = MonteCarloReport.objects.from_report(report)
        >>> len(record.to_rows()) == len(report.rows)
        True
    """
    name = models.CharField(max_length=200)
    master_seed = models.PositiveBigIntegerField()
    n_runs = models.PositiveIntegerField()
    wall_time_s = models.FloatField()
    threads = models.PositiveSmallIntegerField(default=1)
    scenario = models.JSONField(default=dict, blank=True)

    objects = MonteCarloReportManager()

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        """Return name and seed."""
        return f"{self.name} (seed {self.master_seed}, {self.n_runs} runs)"

    def to_rows(self):
        """Rows in report CSV order, NULL RMSE read back as nan."""
        return [
            (row.speed_dps, row.method, row.axis, _loaded(row.rmse_dps), _loaded(row.sqrt_crb_dps),
             _loaded(row.sqrt_crb_sat_dps), row.n_runs, row.failures)
            for row in self.rows.all()
        ]


class MonteCarloRow(models.Model):
    """One line of a saved report."""
    report = models.ForeignKey(MonteCarloReport, on_delete=models.CASCADE, related_name='rows')
    speed_dps = models.FloatField()
    method = models.CharField(max_length=20, choices=McMethod.choices)
    axis = models.CharField(max_length=5, choices=AXIS_CHOICES)
    rmse_dps = models.FloatField(null=True, blank=True)
    sqrt_crb_dps = models.FloatField(null=True, blank=True)
    sqrt_crb_sat_dps = models.FloatField(null=True, blank=True)
    n_runs = models.PositiveIntegerField()
    failures = models.PositiveIntegerField(default=0)

    class Meta:
        ordering = ['id']

    def __str__(self):
        return f"{self.report.name}: {self.method} {self.axis} @ {self.speed_dps:.1f} deg/s"
