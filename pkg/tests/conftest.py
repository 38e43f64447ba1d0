import hypothesis

hypothesis.settings.register_profile(
    "ci", max_examples=50, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("ci")
