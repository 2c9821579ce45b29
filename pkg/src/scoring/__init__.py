"""Link-prediction similarity scorers."""
