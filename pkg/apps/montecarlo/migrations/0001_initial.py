# Generated by Django 5.0 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='MonteCarloReport',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('modified_at', models.DateTimeField(auto_now=True)),
                ('name', models.CharField(max_length=200)),
                ('master_seed', models.PositiveBigIntegerField()),
                ('n_runs', models.PositiveIntegerField()),
                ('wall_time_s', models.FloatField()),
                ('threads', models.PositiveSmallIntegerField(default=1)),
                ('scenario', models.JSONField(blank=True, default=dict)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='MonteCarloRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('speed_dps', models.FloatField()),
                ('method', models.CharField(choices=[('ml', 'Maximum likelihood'), ('tensor', 'Angular acceleration tensor'), ('gyro_average', 'Average gyroscopes')], max_length=20)),
                ('axis', models.CharField(choices=[('x', 'x'), ('y', 'y'), ('z', 'z'), ('speed', 'speed')], max_length=5)),
                ('rmse_dps', models.FloatField(blank=True, null=True)),
                ('sqrt_crb_dps', models.FloatField(blank=True, null=True)),
                ('sqrt_crb_sat_dps', models.FloatField(blank=True, null=True)),
                ('n_runs', models.PositiveIntegerField()),
                ('failures', models.PositiveIntegerField(default=0)),
                ('report', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='montecarlo.montecarloreport')),
            ],
            options={
                'ordering': ['id'],
            },
        ),
    ]
