int scale(int x) {
    int y;
    y = x * 4;
    return y;
}

int compute(int n) {
    int m;
    m = scale(n) + 1;
    return m;
}

int main(int fd) {
    char buf[8];
    int n;
    int size;
    n = read(fd, buf, 8); // source:a
    size = compute(n);
    malloc(size); // sink:a
    return 0;
}
