# Beam models package
