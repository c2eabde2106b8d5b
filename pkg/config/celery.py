"""
Celery configuration for GraphRecover.

Experiment trials are the only background work: `experiments.tasks`
defines a task that runs a chunk of trials, and `run_label_growth` groups
those tasks when more than one job is requested. In development the tasks
run eagerly (CELERY_TASK_ALWAYS_EAGER).
"""

import os
from celery import Celery

# Set default Django settings module
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

# Create Celery app
app = Celery('graphrecover')

# Load configuration from Django settings (namespace='CELERY')
app.config_from_object('django.conf:settings', namespace='CELERY')

# Auto-discover tasks from all installed apps
app.autodiscover_tasks()

# Additional Celery settings
app.conf.update(
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',
    timezone='UTC',
    enable_utc=True,
    task_track_started=True,
)
