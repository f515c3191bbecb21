# Spectral analysis package
