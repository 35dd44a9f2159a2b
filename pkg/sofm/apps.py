from django.apps import AppConfig


class SofmConfig(AppConfig):
    name = 'sofm'
    verbose_name = 'Self-organizing feature map pre-clustering'
