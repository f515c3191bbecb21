# Document codec package
