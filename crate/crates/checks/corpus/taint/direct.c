int main(int fd) {
    char buf[64];
    int n;
    n = read(fd, buf, 64); // source:a
    system(buf); // sink:a
    return n;
}
