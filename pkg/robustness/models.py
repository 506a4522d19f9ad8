from __future__ import annotations

from django.db import models


class ExperimentRun(models.Model):
    """One CLI invocation: enough to replay it and check the numbers match."""

    COMMANDS = [
        ("generate", "Generate"),
        ("phase", "Phase diagram"),
        ("slice", "Slice"),
        ("threshold", "Threshold vs degree"),
    ]

    command = models.CharField(max_length=20, choices=COMMANDS)
    preset = models.CharField(max_length=20, blank=True)

    # ExperimentConfig.snapshot()
    config = models.JSONField()
    master_seed = models.BigIntegerField()
    tool_version = models.CharField(max_length=40)

    started_at = models.DateTimeField()
    finished_at = models.DateTimeField(null=True, blank=True)
    wall_time_seconds = models.FloatField(null=True, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)

    class Meta:
        ordering = ["-started_at"]

    def __str__(self) -> str:
        label = self.preset or self.command
        return f"{label} seed={self.master_seed} ({self.started_at:%Y-%m-%d %H:%M})"

    def stored_points(self) -> list[dict]:
        return [p.as_payload() for p in self.points.order_by("ordinal")]


class ResultPoint(models.Model):
    KINDS = [
        ("grid", "Grid point"),
        ("curve", "Threshold curve point"),
        ("degree", "Threshold vs degree row"),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name="points")
    ordinal = models.IntegerField()
    kind = models.CharField(max_length=10, choices=KINDS)

    phi1 = models.FloatField(null=True, blank=True)
    phi2 = models.FloatField(null=True, blank=True)
    z = models.FloatField(null=True, blank=True)

    r_sim_mean = models.FloatField(null=True, blank=True)
    r_sim_std = models.FloatField(null=True, blank=True)
    r_theory = models.FloatField(null=True, blank=True)
    lambda_max = models.FloatField(null=True, blank=True)

    phi_c_multiplex = models.FloatField(null=True, blank=True)
    phi_c_layer = models.FloatField(null=True, blank=True)
    flag = models.CharField(max_length=20, blank=True)

    per_run = models.JSONField(default=list, blank=True)

    class Meta:
        ordering = ["run", "ordinal"]
        constraints = [
            models.UniqueConstraint(fields=["run", "ordinal"], name="unique_point_per_run")
        ]

    def __str__(self) -> str:
        return f"{self.run_id}#{self.ordinal} ({self.kind})"

    PAYLOAD_FIELDS = (
        "kind", "phi1", "phi2", "z", "r_sim_mean", "r_sim_std", "r_theory",
        "lambda_max", "phi_c_multiplex", "phi_c_layer", "flag", "per_run",
    )

    def as_payload(self) -> dict:
        data = {name: getattr(self, name) for name in self.PAYLOAD_FIELDS}
        if self.kind != "grid":
            data.pop("per_run")
        return data
