# Dirac-type system package
