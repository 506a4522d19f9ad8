# Generated by Django 6.0.2 on 2026-10-16 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('generate', 'Generate'), ('phase', 'Phase diagram'), ('slice', 'Slice'), ('threshold', 'Threshold vs degree')], max_length=20)),
                ('preset', models.CharField(blank=True, max_length=20)),
                ('config', models.JSONField()),
                ('master_seed', models.BigIntegerField()),
                ('tool_version', models.CharField(max_length=40)),
                ('started_at', models.DateTimeField()),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('wall_time_seconds', models.FloatField(blank=True, null=True)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='ResultPoint',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('ordinal', models.IntegerField()),
                ('kind', models.CharField(choices=[('grid', 'Grid point'), ('curve', 'Threshold curve point'), ('degree', 'Threshold vs degree row')], max_length=10)),
                ('phi1', models.FloatField(blank=True, null=True)),
                ('phi2', models.FloatField(blank=True, null=True)),
                ('z', models.FloatField(blank=True, null=True)),
                ('r_sim_mean', models.FloatField(blank=True, null=True)),
                ('r_sim_std', models.FloatField(blank=True, null=True)),
                ('r_theory', models.FloatField(blank=True, null=True)),
                ('lambda_max', models.FloatField(blank=True, null=True)),
                ('phi_c_multiplex', models.FloatField(blank=True, null=True)),
                ('phi_c_layer', models.FloatField(blank=True, null=True)),
                ('flag', models.CharField(blank=True, max_length=20)),
                ('per_run', models.JSONField(blank=True, default=list)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='points', to='robustness.experimentrun')),
            ],
            options={
                'ordering': ['run', 'ordinal'],
                'constraints': [models.UniqueConstraint(fields=('run', 'ordinal'), name='unique_point_per_run')],
            },
        ),
    ]
