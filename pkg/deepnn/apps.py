from django.apps import AppConfig


class DeepnnConfig(AppConfig):
    name = 'deepnn'
    verbose_name = 'Deep feedforward classifier'
